#pragma once

#include <string>

#include <json.hpp>

#include "gmsplit/config.hpp"

namespace gmsplit {

inline constexpr int kManifestSchemaVersion = 1;

nlohmann::json to_json(const GMMatrix& gm);
nlohmann::json to_json(const SplitDecision& d);
nlohmann::json to_json(const TrainedSupernet& t);
nlohmann::json to_json(const SelectionReport& r);
nlohmann::json to_json(const PartitionSet& p);
nlohmann::json space_json(const CellGraph& graph);
nlohmann::json to_json(const RankingReport& r);
nlohmann::json to_json(const TripleExperimentReport& r);
nlohmann::json to_json(const std::vector<SweepPoint>& points);

// Everything a `split` run produced: enough to re-derive every reported
// number without re-training.
nlohmann::json build_split_manifest(const RunConfig& cfg, const Dataset& data,
                                    const PipelineResult& pipeline, const FinalSelection& selection,
                                    std::uint64_t seed);

// FNV-1a over the canonical dump with the volatile fields ("timing",
// "determinism_hash") removed; hex string.
std::string determinism_hash(const nlohmann::json& manifest);

void write_json_file(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json_file(const std::string& path);

}  // namespace gmsplit
