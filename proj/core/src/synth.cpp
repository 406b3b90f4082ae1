#include "fairhil/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fairhil/error.hpp"

namespace fairhil {
namespace {

// Structural equations (all noise terms independent):
//
//   foreign      ~ Bernoulli(kForeignShare)
//   age          ~ Uniform[18, 75], integer years
//   late         ~ Poisson(kLateRate) clipped to 5
//   risk_latent  = kRiskForeign * foreign + kRiskAge * (age - 46)
//                  + kRiskLate * late + N(0, kRiskNoise)
//   credit_risk_level = 1..5 by cutting risk_latent at kRiskCuts
//   log_income   = log(kIncomeBase) + kIncomeAge * (age - 46)
//                  + kIncomeMale * male + N(0, kIncomeNoise)
//   decision     = kDecisionRisk * credit_risk_level
//                  + kDecisionIncome * (log_income - log(kIncomeBase))
//                  + N(0, kDecisionNoise)
//   result       = accepted  iff decision > kDecisionCut
//
// which plants citizenship -> credit_risk_level -> result,
// age -> credit_risk_level -> result and net_monthly_income -> result.
// The remaining columns are weakly related filler.
constexpr double kForeignShare = 0.30;
constexpr double kLateRate = 0.6;
constexpr double kRiskForeign = 1.6;
constexpr double kRiskAge = -0.035;
constexpr double kRiskLate = 0.35;
constexpr double kRiskNoise = 0.55;
constexpr std::array<double, 4> kRiskCuts = {-0.6, 0.0, 0.6, 1.3};
constexpr double kIncomeBase = 2600.0;
constexpr double kIncomeAge = 0.006;
constexpr double kIncomeMale = 0.08;
constexpr double kIncomeNoise = 0.35;
constexpr double kDecisionRisk = -0.75;
constexpr double kDecisionIncome = 1.6;
constexpr double kDecisionNoise = 0.6;
constexpr double kDecisionCut = -1.85;

double round_to(double v, double step) { return std::round(v / step) * step; }

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng_); }
  bool bernoulli(double p) { return std::bernoulli_distribution(p)(rng_); }
  int poisson(double rate) { return std::poisson_distribution<int>(rate)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  template <std::size_t N>
  std::size_t choice(const std::array<double, N>& weights) {
    return std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng_);
  }

 private:
  std::mt19937_64 rng_;
};

struct LabelColumn {
  std::string name;
  std::vector<std::optional<std::string>> cells;
};

}  // namespace

DataTable synth_loans(std::uint64_t seed, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kValidation, "synth_loans needs at least one row");
  Sampler s(seed);

  std::vector<double> age(n), net_income(n), household_income(n), savings(n), debt(n), loan_amount(n),
      monthly_payment(n), years_with_bank(n), credit_score(n), residence_years(n);
  auto labels = [n](std::string name) { return LabelColumn{std::move(name), std::vector<std::optional<std::string>>(n)}; };
  LabelColumn gender = labels("gender"), citizenship = labels("citizenship"), marital = labels("marital_status"),
              dependents = labels("dependents"), education = labels("education"), insurance = labels("insurance"),
              purpose = labels("loan_purpose"), duration = labels("loan_duration_months"),
              risk = labels("credit_risk_level"), previous = labels("previous_loans"), late = labels("late_payments"),
              laundering = labels("money_laundering_check"), employment = labels("employment_type"),
              housing = labels("housing"), phone = labels("phone_registered"), result = labels("result");

  static constexpr std::array<const char*, 3> kMarital = {"single", "married", "divorced"};
  static constexpr std::array<const char*, 3> kEducation = {"basic", "secondary", "tertiary"};
  static constexpr std::array<const char*, 5> kPurpose = {"car", "home", "education", "business", "other"};
  static constexpr std::array<int, 6> kDurations = {12, 24, 36, 48, 60, 72};
  static constexpr std::array<const char*, 4> kEmployment = {"employed", "self_employed", "unemployed", "retired"};
  static constexpr std::array<const char*, 3> kHousing = {"own", "rent", "other"};

  for (std::size_t i = 0; i < n; ++i) {
    // Demographics.
    const double a = static_cast<double>(s.integer(18, 75));
    const bool male = s.bernoulli(0.52);
    const bool foreign = s.bernoulli(kForeignShare);
    age[i] = a;
    gender.cells[i] = male ? "M" : "F";
    citizenship.cells[i] = foreign ? "foreign" : "domestic";
    const double married_p = std::clamp(0.15 + 0.012 * (a - 18.0), 0.0, 0.7);
    marital.cells[i] = kMarital[s.choice(std::array<double, 3>{1.0 - married_p, married_p, 0.12})];
    dependents.cells[i] = std::to_string(std::min(4, s.poisson(0.9)));
    const auto edu = s.choice(std::array<double, 3>{0.25, 0.45, 0.30});
    education.cells[i] = kEducation[edu];

    // Finance.
    const double log_income = std::log(kIncomeBase) + kIncomeAge * (a - 46.0) + kIncomeMale * (male ? 1.0 : 0.0) +
                              0.1 * static_cast<double>(edu) + s.normal(0.0, kIncomeNoise);
    net_income[i] = round_to(std::exp(log_income), 0.01);
    const bool married = *marital.cells[i] == "married";
    household_income[i] = round_to(net_income[i] * (1.0 + (married ? s.uniform(0.3, 1.0) : s.uniform(0.0, 0.2))), 0.01);
    insurance.cells[i] = s.bernoulli(0.55) ? "yes" : "no";
    savings[i] = round_to(std::exp(s.normal(8.0, 1.1)), 0.01);
    debt[i] = round_to(std::max(0.0, s.normal(4000.0, 3000.0)), 0.01);

    // Loan.
    const auto p = s.choice(std::array<double, 5>{0.3, 0.25, 0.1, 0.15, 0.2});
    purpose.cells[i] = kPurpose[p];
    const int months = kDurations[s.choice(std::array<double, 6>{0.15, 0.2, 0.25, 0.15, 0.15, 0.1})];
    duration.cells[i] = std::to_string(months);
    loan_amount[i] = round_to(std::exp(s.normal(9.4, 0.6)), 1.0);
    monthly_payment[i] = round_to(loan_amount[i] * 1.06 / months, 0.01);

    // History and internal checks.
    years_with_bank[i] = round_to(std::min(a - 18.0, s.uniform(0.0, 30.0)), 0.1);
    const int n_late = std::min(5, s.poisson(kLateRate));
    late.cells[i] = std::to_string(n_late);
    previous.cells[i] = std::to_string(std::min(6, s.poisson(1.2)));
    const double risk_latent = kRiskForeign * (foreign ? 1.0 : 0.0) + kRiskAge * (a - 46.0) +
                               kRiskLate * n_late + s.normal(0.0, kRiskNoise);
    const int level = 1 + static_cast<int>(std::upper_bound(kRiskCuts.begin(), kRiskCuts.end(), risk_latent) -
                                           kRiskCuts.begin());
    risk.cells[i] = std::to_string(level);
    credit_score[i] = round_to(std::clamp(720.0 - 35.0 * level + s.normal(0.0, 40.0), 300.0, 850.0), 1.0);
    laundering.cells[i] = s.bernoulli(0.03) ? "flagged" : "pass";
    employment.cells[i] = kEmployment[s.choice(std::array<double, 4>{0.65, 0.15, 0.08, 0.12})];
    housing.cells[i] = kHousing[s.choice(std::array<double, 3>{0.45, 0.45, 0.10})];
    phone.cells[i] = s.bernoulli(0.85) ? "yes" : "no";
    residence_years[i] = round_to(s.uniform(0.0, 25.0), 0.1);

    const double decision = kDecisionRisk * level + kDecisionIncome * (log_income - std::log(kIncomeBase)) +
                            s.normal(0.0, kDecisionNoise);
    result.cells[i] = decision > kDecisionCut ? kSynthPositive : "rejected";
  }

  std::vector<Column> cols;
  cols.reserve(kSynthColumns);
  auto cat = [&](LabelColumn& c) { cols.push_back(Column::from_labels(std::move(c.name), c.cells)); };
  auto num = [&](const char* name, std::vector<double>& v) { cols.push_back(Column::numeric(name, std::move(v))); };

  num("age", age);
  cat(gender);
  cat(citizenship);
  cat(marital);
  cat(dependents);
  cat(education);
  num("net_monthly_income", net_income);
  num("household_income", household_income);
  cat(insurance);
  num("savings", savings);
  num("existing_debt", debt);
  num("loan_amount", loan_amount);
  cat(purpose);
  cat(duration);
  num("monthly_payment", monthly_payment);
  num("years_with_bank", years_with_bank);
  cat(risk);
  cat(previous);
  cat(late);
  cat(laundering);
  num("credit_score", credit_score);
  cat(employment);
  cat(housing);
  cat(phone);
  num("residence_years", residence_years);
  cat(result);

  DataTable table(std::move(cols));
  const auto& outcome = table.column(kSynthTarget);
  if (outcome.levels().size() != 2) {
    // Tiny n can produce a single class; the target contract needs both.
    return table;
  }
  return table.with_target(kSynthTarget, kSynthPositive);
}

}  // namespace fairhil
