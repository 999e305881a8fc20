#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "idrank/planner.hpp"
#include "idrank/profile.hpp"
#include "idrank/stability.hpp"
#include "idrank/twonn.hpp"

namespace idrank {

// JSON documents use the field names of the corresponding structs, in
// declaration order. Doubles are printed in shortest round-trip form.

std::string to_json(const IdEstimate& estimate, int indent = 2);
std::string to_json(const StabilityReport& report, int indent = 2);
std::string to_json(const LayerProfile& profile, int indent = 2);
std::string to_json(const ProfileDiff& diff, int indent = 2);
/// Includes "schema_version": 1 ahead of the plan fields.
std::string to_json(const RankPlan& plan, int indent = 2);

/// Throw FormatError on malformed or mistyped documents.
IdEstimate estimate_from_json(std::string_view text);
StabilityReport stability_from_json(std::string_view text);
/// Requires "d"; mean_id is recomputed from d.
LayerProfile profile_from_json(std::string_view text);
/// Requires schema_version 1.
RankPlan plan_from_json(std::string_view text);

/// Writes to_json(plan) plus a trailing newline. Throws IoError.
void emit_plan(const RankPlan& plan, const std::filesystem::path& path);
RankPlan read_plan(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace idrank
