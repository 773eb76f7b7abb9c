#include "tabkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "tabkit/error.hpp"
#include "tabkit/logreg.hpp"
#include "tabkit/rng.hpp"

namespace tabkit {
namespace {

double uniform_int(SplitMix64& rng, int lo, int hi) {
  return static_cast<double>(lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))));
}

// Normal draw clipped to [lo, hi] and rounded to `digits` decimals.
double clipped_normal(SplitMix64& rng, double mean, double sd, double lo, double hi, int digits) {
  const double scale = std::pow(10.0, digits);
  const double v = std::clamp(rng.normal(mean, sd), lo, hi);
  return std::round(v * scale) / scale;
}

struct NumericSpec {
  double mean, sd, lo, hi;
  int digits;
};

// Order matches kGradNumeric. Starting_Salary is drawn separately.
constexpr std::array<NumericSpec, 13> kGradSpecs = {{
    {25.0, 2.5, 18.0, 35.0, 0},       // Age
    {3.0, 0.45, 2.0, 4.0, 2},         // High_School_GPA
    {1250.0, 180.0, 800.0, 1600.0, 0},  // SAT_Score
    {500.0, 220.0, 1.0, 1000.0, 0},   // University_Ranking
    {3.0, 0.45, 2.0, 4.0, 2},         // University_GPA
    {2.0, 1.0, 0.0, 5.0, 0},          // Internships_Completed
    {5.0, 2.0, 0.0, 10.0, 0},         // Projects_Completed
    {2.5, 1.2, 0.0, 6.0, 0},          // Certifications
    {5.5, 2.0, 1.0, 10.0, 0},         // Soft_Skills_Score
    {5.5, 2.0, 1.0, 10.0, 0},         // Networking_Score
    {2.5, 1.2, 0.0, 6.0, 0},          // Job_Offers
    {0.0, 0.0, 0.0, 0.0, 0},          // Starting_Salary (log-normal)
    {5.5, 2.0, 1.0, 10.0, 0},         // Career_Satisfaction
}};

constexpr std::array<double, 3> kPlantedWeights = {1.0, 0.85, 0.7};

const std::array<std::string, 2> kGenders = {"Female", "Male"};
const std::array<std::string, 6> kFields = {"Arts", "Business", "Computer Science", "Engineering", "Law", "Medicine"};
const std::array<std::string, 4> kLevels = {"Entry", "Executive", "Mid", "Senior"};

template <std::size_t N>
std::optional<std::string> pick(SplitMix64& rng, const std::array<std::string, N>& levels) {
  return levels[static_cast<std::size_t>(rng.below(N))];
}

}  // namespace

SocialSynth gen_social(const SocialSynthSpec& spec) {
  if (spec.n < 10) throw_usage("InvalidParameter", "gen_social needs n >= 10");
  if (!(spec.high_weight > 0.0 && spec.high_weight < 1.0))
    throw_usage("InvalidParameter", "high_weight must lie in (0, 1)");
  SplitMix64 rng(spec.seed);
  std::vector<std::optional<std::string>> app(spec.n);
  std::vector<double> minutes(spec.n), posts(spec.n), likes(spec.n), follows(spec.n);
  SocialSynth out;
  out.regime.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const bool high = rng.uniform() < spec.high_weight;
    out.regime[i] = high ? 1 : 0;
    app[i] = pick(rng, kSocialApps);
    minutes[i] = high ? uniform_int(rng, 300, 500) : uniform_int(rng, 5, 200);
    posts[i] = uniform_int(rng, 0, 20);
    likes[i] = uniform_int(rng, 0, 200);
    follows[i] = high ? uniform_int(rng, 30, 50) : uniform_int(rng, 0, 20);
  }
  out.table = Table("social");
  out.table.add_column(Column::make_categorical("App", app));
  out.table.add_column(Column::make_numeric("Daily_Minutes_Spent", std::move(minutes)));
  out.table.add_column(Column::make_numeric("Posts_Per_Day", std::move(posts)));
  out.table.add_column(Column::make_numeric("Likes_Per_Day", std::move(likes)));
  out.table.add_column(Column::make_numeric("Follows_Per_Day", std::move(follows)));
  return out;
}

Table gen_grad(const GradSynthSpec& spec) {
  if (spec.n < 50) throw_usage("InvalidParameter", "gen_grad needs n >= 50");
  if (!(spec.positive_rate > 0.0 && spec.positive_rate < 1.0))
    throw_usage("InvalidParameter", "positive_rate must lie in (0, 1)");
  SplitMix64 rng(spec.seed);
  const std::size_t n = spec.n, p = kGradNumeric.size();
  std::vector<std::vector<double>> numeric(p, std::vector<double>(n));
  std::vector<std::optional<std::string>> gender(n), field(n), level(n), label(n);
  std::vector<double> eta(n, 0.0);

  double norm = 0.0;
  for (double w : kPlantedWeights) norm += w * w;
  norm = std::sqrt(norm);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const auto& s = kGradSpecs[j];
      if (kGradNumeric[j] == "Starting_Salary")
        numeric[j][i] = std::round(std::exp(rng.normal(std::log(50000.0), 0.225)) / 100.0) * 100.0;
      else
        numeric[j][i] = clipped_normal(rng, s.mean, s.sd, s.lo, s.hi, s.digits);
    }
    gender[i] = pick(rng, kGenders);
    field[i] = pick(rng, kFields);
    level[i] = pick(rng, kLevels);
    for (std::size_t t = 0; t < kGradPlanted.size(); ++t) {
      const auto& s = kGradSpecs[kGradPlanted[t]];
      eta[i] += spec.signal * kPlantedWeights[t] / norm * (numeric[kGradPlanted[t]][i] - s.mean) / s.sd;
    }
  }
  const double intercept = std::log(spec.positive_rate / (1.0 - spec.positive_rate));
  for (std::size_t i = 0; i < n; ++i)
    label[i] = rng.uniform() < sigmoid(eta[i] + intercept) ? "Yes" : "No";

  Table t("graduates");
  for (std::size_t j = 0; j < p; ++j) t.add_column(Column::make_numeric(kGradNumeric[j], std::move(numeric[j])));
  t.add_column(Column::make_categorical("Gender", gender));
  t.add_column(Column::make_categorical("Field_of_Study", field));
  t.add_column(Column::make_categorical("Current_Job_Level", level));
  t.add_column(Column::make_categorical(kGradLabel, label));
  return t;
}

}  // namespace tabkit
