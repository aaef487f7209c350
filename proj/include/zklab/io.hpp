#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "zklab/couples.hpp"
#include "zklab/kinetic.hpp"
#include "zklab/lattice.hpp"
#include "zklab/solver.hpp"

namespace zk::io {

inline constexpr int kSchemaVersion = 1;

// Shortest round-trip decimal representation (up to 17 significant digits).
std::string format_double(double x);

// --- couple / trace JSON (schema documented in README) ---------------------
nlohmann::json couple_to_json(const diag::Couple& c);
diag::Couple couple_from_json(const nlohmann::json& j);
nlohmann::json trace_to_json(const diag::DecompositionTrace& t);
diag::DecompositionTrace trace_from_json(const nlohmann::json& j);

// --- tabular outputs --------------------------------------------------------
// One JSON object per line: {"K":[...],"mean":...,"variance":...,"se":...}
// preceded by a header line with schema version and metadata.
void write_stats_jsonl(std::ostream& os, const solver::EnsembleStats& stats);
solver::EnsembleStats read_stats_jsonl(std::istream& is, const BallIndex& ball);

void write_comparison_csv(std::ostream& os, const kinetic::SpectrumComparison& cmp);

// --- run manifest -----------------------------------------------------------
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config;  // canonical key -> value
    std::uint64_t seed = 0;
    int artifact_version = kSchemaVersion;
    double wall_seconds = 0.0;
    std::vector<std::pair<std::string, double>> stage_seconds;
    std::vector<std::string> warnings;

    // FNV-1a over sorted "key=value" lines: invariant under key reordering
    // of the source config text.
    std::string config_digest() const;
};

nlohmann::json manifest_to_json(const RunManifest& m);

// --- checkpoints -------------------------------------------------------------
// Binary field dump: 8-byte little-endian header length, JSON header
// (schema, dim, L, radius, mode count, time), then per mode a little-endian
// (float32 re, float32 im) pair in ball order.
void write_checkpoint(std::ostream& os, const SpectralField& f);
SpectralField read_checkpoint(std::istream& is, const BallIndex& ball);

}  // namespace zk::io
