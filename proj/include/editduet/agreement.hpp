// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace editduet {

/// Two-category PABAK, 2 * p_o - 1. Throws OutOfRange unless 0 <= p_o <= 1.
double pabak(double observed_agreement);

enum class Choice { A, B };

std::string_view to_string(Choice choice);
Choice parse_choice(std::string_view text);

struct Vote {
  std::string pair_id;
  std::string voter_id;
  Choice choice = Choice::A;
};

/// CSV with header "pair_id,voter_id,choice". Throws SchemaError.
std::vector<Vote> parse_votes_csv(std::istream& in);
std::vector<Vote> load_votes_csv(const std::filesystem::path& path);

/// CSV with header "pair_id,choice".
std::map<std::string, Choice> parse_choices_csv(std::istream& in);
std::map<std::string, Choice> load_choices_csv(const std::filesystem::path& path);

struct AgreementStats {
  std::size_t n_pairs = 0;
  std::size_t n_votes = 0;
  std::size_t judge_matches = 0;
  /// Judge vs per-pair majority.
  double raw_agreement = 0.0;
  double pabak = 0.0;
  /// Mean over pairs of the fraction of voter pairs that agree:
  /// (C(a, 2) + C(b, 2)) / C(a + b, 2) for a votes on A and b on B.
  double inter_human_agreement = 0.0;
  double inter_human_pabak = 0.0;
};

/// Throws TieError on an evenly split pair, SchemaError when the judge
/// choices and the voted pairs differ.
AgreementStats agreement_stats(const std::map<std::string, Choice>& judge_choices, std::span<const Vote> votes);

nlohmann::json to_json(const AgreementStats& stats);

}  // namespace editduet
