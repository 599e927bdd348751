// SPDX-License-Identifier: Apache-2.0
#include "editduet/agreement.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "editduet/errors.hpp"
#include "text_util.hpp"

namespace editduet {

double pabak(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw OutOfRange("observed agreement must lie in [0, 1]");
  return 2.0 * p - 1.0;
}

std::string_view to_string(Choice choice) { return choice == Choice::A ? "A" : "B"; }

Choice parse_choice(std::string_view text) {
  const std::string t = detail::trim(text);
  if (t == "A") return Choice::A;
  if (t == "B") return Choice::B;
  throw SchemaError("choice must be A or B, got \"" + t + "\"");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(detail::trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

// Rows of a CSV whose header must equal `header`; blank lines skipped.
std::vector<std::vector<std::string>> read_csv(std::istream& in, const std::vector<std::string>& header) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<std::string>> rows;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (!saw_header) {
      if (fields != header) throw SchemaError("line " + std::to_string(line_no) + ": unexpected CSV header");
      saw_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " fields");
    }
    rows.push_back(std::move(fields));
  }
  if (!saw_header) throw SchemaError("CSV is empty");
  return rows;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read " + path.string());
  return in;
}

double pairs_of(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

std::vector<Vote> parse_votes_csv(std::istream& in) {
  std::vector<Vote> votes;
  for (auto& row : read_csv(in, {"pair_id", "voter_id", "choice"})) {
    votes.push_back({row[0], row[1], parse_choice(row[2])});
  }
  return votes;
}

std::vector<Vote> load_votes_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_votes_csv(in);
}

std::map<std::string, Choice> parse_choices_csv(std::istream& in) {
  std::map<std::string, Choice> choices;
  for (auto& row : read_csv(in, {"pair_id", "choice"})) {
    if (!choices.emplace(row[0], parse_choice(row[1])).second) {
      throw SchemaError("duplicate pair_id \"" + row[0] + "\"");
    }
  }
  return choices;
}

std::map<std::string, Choice> load_choices_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_choices_csv(in);
}

AgreementStats agreement_stats(const std::map<std::string, Choice>& judge_choices, std::span<const Vote> votes) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // pair -> (A, B)
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& v : votes) {
    if (!seen.emplace(v.pair_id, v.voter_id).second) {
      throw SchemaError("voter \"" + v.voter_id + "\" voted twice on pair \"" + v.pair_id + "\"");
    }
    auto& t = tally[v.pair_id];
    (v.choice == Choice::A ? t.first : t.second) += 1;
  }
  if (tally.empty()) throw EmptyInput("no votes");
  for (const auto& [pair, _] : judge_choices) {
    if (!tally.count(pair)) throw SchemaError("judge choice for pair \"" + pair + "\" has no votes");
  }

  AgreementStats stats;
  stats.n_pairs = tally.size();
  stats.n_votes = votes.size();
  double inter = 0.0;
  for (const auto& [pair, t] : tally) {
    const auto [a, b] = t;
    if (a == b) throw TieError("pair \"" + pair + "\" is split evenly");
    const auto judge = judge_choices.find(pair);
    if (judge == judge_choices.end()) throw SchemaError("no judge choice for pair \"" + pair + "\"");
    const Choice majority = a > b ? Choice::A : Choice::B;
    if (judge->second == majority) ++stats.judge_matches;
    const double n = static_cast<double>(a + b);
    inter += n < 2.0 ? 1.0 : (pairs_of(static_cast<double>(a)) + pairs_of(static_cast<double>(b))) / pairs_of(n);
  }
  const double pairs = static_cast<double>(stats.n_pairs);
  stats.raw_agreement = static_cast<double>(stats.judge_matches) / pairs;
  stats.pabak = pabak(stats.raw_agreement);
  stats.inter_human_agreement = inter / pairs;
  stats.inter_human_pabak = pabak(stats.inter_human_agreement);
  return stats;
}

nlohmann::json to_json(const AgreementStats& s) {
  return {{"n_pairs", s.n_pairs},
          {"n_votes", s.n_votes},
          {"judge_matches", s.judge_matches},
          {"raw_agreement", s.raw_agreement},
          {"pabak", s.pabak},
          {"inter_human_agreement", s.inter_human_agreement},
          {"inter_human_pabak", s.inter_human_pabak},
          {"inter_human_formula", "mean over pairs of (C(a,2) + C(b,2)) / C(a+b,2)"}};
}

}  // namespace editduet
