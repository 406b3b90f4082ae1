#include "fairhil/subgroup.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>

#include "fairhil/error.hpp"
#include "fairhil/summary.hpp"

namespace fairhil {
namespace {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

Combination make_combination(std::vector<std::pair<std::string, std::string>> constraints,
                             std::size_t max_constraints) {
  if (constraints.empty()) throw Error(ErrorCode::kValidation, "a combination needs at least one constraint");
  if (constraints.size() > max_constraints) {
    throw Error(ErrorCode::kValidation, "a combination allows at most " + std::to_string(max_constraints) +
                                            " constraints, got " + std::to_string(constraints.size()));
  }
  std::sort(constraints.begin(), constraints.end());
  for (std::size_t i = 1; i < constraints.size(); ++i) {
    if (constraints[i].first == constraints[i - 1].first) {
      throw Error(ErrorCode::kValidation, "feature '" + constraints[i].first + "' appears twice in a combination");
    }
  }
  // Unit separators cannot occur in the CSV-derived names and values.
  std::string key;
  for (const auto& [f, v] : constraints) key += f + '\x1f' + v + '\x1e';
  Combination c;
  c.id = fnv1a_hex(key);
  c.constraints = std::move(constraints);
  return c;
}

SubgroupCard build_card(const DataTable& table, const Combination& combination, std::span<const std::int8_t> outcomes,
                        std::size_t max_constraints, std::size_t k_max) {
  // Re-validate: cards may be built from ids restored from disk.
  make_combination(combination.constraints, max_constraints);
  std::vector<Constraint> filters;
  for (const auto& [f, v] : combination.constraints) filters.push_back(Constraint{f, v});
  const auto members = filter_rows(table, filters, k_max);

  SubgroupCard card;
  card.combination = combination;
  card.member_count = members.size();
  std::size_t known = 0;
  for (std::size_t r : members) {
    if (outcomes[r] == kUnknownOutcome) continue;
    ++known;
    card.positive_count += outcomes[r] == 1 ? 1 : 0;
  }
  if (known > 0) card.acceptance_rate = static_cast<double>(card.positive_count) / static_cast<double>(known);
  return card;
}

std::vector<SubgroupCard> order_cards(std::vector<SubgroupCard> cards) {
  std::stable_sort(cards.begin(), cards.end(), [](const SubgroupCard& a, const SubgroupCard& b) {
    if (a.acceptance_rate.has_value() != b.acceptance_rate.has_value()) return a.acceptance_rate.has_value();
    if (a.acceptance_rate && *a.acceptance_rate != *b.acceptance_rate) return *a.acceptance_rate < *b.acceptance_rate;
    if (a.member_count != b.member_count) return a.member_count > b.member_count;
    return a.combination.id < b.combination.id;
  });
  return cards;
}

void FlagSet::set(const std::string& id, bool flagged, const std::set<std::string>& known) {
  if (!known.count(id)) throw Error(ErrorCode::kNotFound, "unknown id '" + id + "'");
  if (flagged) {
    ids_.insert(id);
  } else {
    ids_.erase(id);
  }
}

void FlagSet::retain(const std::set<std::string>& known) {
  for (auto it = ids_.begin(); it != ids_.end();) {
    it = known.count(*it) ? std::next(it) : ids_.erase(it);
  }
}

}  // namespace fairhil
