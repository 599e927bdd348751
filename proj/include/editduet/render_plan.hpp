// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "editduet/timeline.hpp"

namespace editduet {

class NothingToRender : public std::runtime_error {
 public:
  NothingToRender() : std::runtime_error("nothing to render") {}
};

struct Cut {
  std::string source_file;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct RenderPlan {
  std::vector<Cut> cuts;  // timeline order
  std::optional<std::string> aroll_file;
  std::string output_name;
};

/// Throws NothingToRender for an empty timeline.
RenderPlan make_render_plan(const Timeline& timeline, std::optional<std::string> aroll_file,
                            std::string output_name);

nlohmann::json to_json(const RenderPlan& plan);

using Command = std::vector<std::string>;

/// ffmpeg invocations: one trim per cut into work_dir, a concat of the cuts,
/// and an A-roll audio overlay when present. The concat list is
/// work_dir/concat.txt (see concat_list).
std::vector<Command> render_commands(const RenderPlan& plan, const std::filesystem::path& media_root,
                                     const std::filesystem::path& work_dir);
std::string concat_list(const RenderPlan& plan, const std::filesystem::path& work_dir);

/// POSIX sh script running the commands in order.
std::string render_script(const std::vector<Command>& commands);

/// Source files (and the A-roll) absent under media_root.
std::vector<std::filesystem::path> missing_media(const RenderPlan& plan, const std::filesystem::path& media_root);

/// Runs the commands in order; returns the first non-zero exit status or 0.
int run_commands(const std::vector<Command>& commands);

}  // namespace editduet
