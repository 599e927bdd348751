// SPDX-License-Identifier: Apache-2.0
#include "editduet/render_plan.hpp"

#include <cstdio>
#include <cstdlib>
#include <set>

#include <sys/wait.h>

#include "text_util.hpp"

namespace editduet {

namespace {

std::string cut_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "cut_%03zu.mp4", i);
  return buf;
}

std::string shell_quote(const std::string& s) {
  if (!s.empty() && s.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-./=:+") ==
                        std::string::npos) {
    return s;
  }
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

RenderPlan make_render_plan(const Timeline& timeline, std::optional<std::string> aroll_file, std::string output_name) {
  if (timeline.empty()) throw NothingToRender();
  RenderPlan plan;
  for (const auto& c : timeline.clips) plan.cuts.push_back({c.source_file, c.start_s, c.end_s});
  plan.aroll_file = std::move(aroll_file);
  plan.output_name = std::move(output_name);
  return plan;
}

nlohmann::json to_json(const RenderPlan& plan) {
  nlohmann::json cuts = nlohmann::json::array();
  for (const auto& c : plan.cuts) cuts.push_back({{"source_file", c.source_file}, {"start", c.start_s}, {"end", c.end_s}});
  return {{"cuts", cuts},
          {"aroll_file", plan.aroll_file ? nlohmann::json(*plan.aroll_file) : nlohmann::json(nullptr)},
          {"output_name", plan.output_name}};
}

std::vector<Command> render_commands(const RenderPlan& plan, const std::filesystem::path& media_root,
                                     const std::filesystem::path& work_dir) {
  std::vector<Command> commands;
  for (std::size_t i = 0; i < plan.cuts.size(); ++i) {
    const auto& c = plan.cuts[i];
    commands.push_back({"ffmpeg", "-loglevel", "error", "-y", "-ss", detail::fixed(c.start_s, 3), "-i",
                        (media_root / c.source_file).string(), "-t", detail::fixed(c.end_s - c.start_s, 3), "-an",
                        "-c:v", "libx264", "-pix_fmt", "yuv420p", (work_dir / cut_name(i)).string()});
  }
  const auto broll = plan.aroll_file ? (work_dir / "broll.mp4") : std::filesystem::path(plan.output_name);
  commands.push_back({"ffmpeg", "-loglevel", "error", "-y", "-f", "concat", "-safe", "0", "-i",
                      (work_dir / "concat.txt").string(), "-c", "copy", broll.string()});
  if (plan.aroll_file) {
    commands.push_back({"ffmpeg", "-loglevel", "error", "-y", "-i", broll.string(), "-i",
                        (media_root / *plan.aroll_file).string(), "-map", "0:v", "-map", "1:a", "-c:v", "copy",
                        "-shortest", plan.output_name});
  }
  return commands;
}

std::string concat_list(const RenderPlan& plan, const std::filesystem::path& work_dir) {
  std::string out;
  for (std::size_t i = 0; i < plan.cuts.size(); ++i) {
    out += "file '" + std::filesystem::absolute(work_dir / cut_name(i)).string() + "'\n";
  }
  return out;
}

std::string render_script(const std::vector<Command>& commands) {
  std::string out = "#!/bin/sh\nset -e\n";
  for (const auto& cmd : commands) {
    for (std::size_t i = 0; i < cmd.size(); ++i) {
      if (i > 0) out += ' ';
      out += shell_quote(cmd[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::filesystem::path> missing_media(const RenderPlan& plan, const std::filesystem::path& media_root) {
  std::set<std::string> names;
  for (const auto& c : plan.cuts) names.insert(c.source_file);
  if (plan.aroll_file) names.insert(*plan.aroll_file);
  std::vector<std::filesystem::path> missing;
  for (const auto& n : names) {
    const auto p = media_root / n;
    if (!std::filesystem::exists(p)) missing.push_back(p);
  }
  return missing;
}

int run_commands(const std::vector<Command>& commands) {
  for (const auto& cmd : commands) {
    std::string line;
    for (std::size_t i = 0; i < cmd.size(); ++i) {
      if (i > 0) line += ' ';
      line += shell_quote(cmd[i]);
    }
    const int status = std::system(line.c_str());
    if (status != 0) return WIFEXITED(status) ? WEXITSTATUS(status) : 1;
  }
  return 0;
}

}  // namespace editduet
