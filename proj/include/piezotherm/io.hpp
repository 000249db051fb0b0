#pragma once

// Plain-text output: field CSVs (header = node coordinates, one row per
// time level), two-column trace CSVs with a JSON sidecar, JSON reports.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "piezotherm/observation.hpp"

namespace piezotherm {

/// Shortest round-trip decimal form ("%.17g").
std::string format_double(double x);

void write_field_csv(const std::filesystem::path& path, const SpaceTimeField& f);
void write_trace_csv(const std::filesystem::path& path, const ObservationTrace& trace);
/// Reads a two-column trace; kind, gamma, delta and seed come from the
/// sidecar <path>.json when present.
ObservationTrace read_trace_csv(const std::filesystem::path& path, const TimeGrid& time);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace piezotherm
