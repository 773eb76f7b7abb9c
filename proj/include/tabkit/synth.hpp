#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tabkit/preprocess.hpp"
#include "tabkit/tabular.hpp"

namespace tabkit {

/// Social-media activity generator. Each row belongs to a high-engagement
/// regime (Daily_Minutes_Spent in [300, 500], Follows_Per_Day in [30, 50])
/// or a low one ([5, 200] and [0, 20]). Posts_Per_Day in [0, 20] and
/// Likes_Per_Day in [0, 200] are uniform in both; App is uniform over seven
/// platforms. All activity values are integers.
struct SocialSynthSpec {
  std::size_t n = 1000;
  std::uint64_t seed = 7;
  double high_weight = 0.487;  ///< fraction of high-engagement rows
};

struct SocialSynth {
  Table table;
  Labels regime;  ///< 1 = high engagement
};

inline const std::array<std::string, 7> kSocialApps = {"Facebook", "Instagram", "LinkedIn", "Pinterest",
                                                       "Snapchat", "TikTok", "Twitter"};

/// Throws InvalidParameter for n < 10 or a weight outside (0, 1).
SocialSynth gen_social(const SocialSynthSpec& spec);

/// Graduate-profile generator with an Entrepreneurship label (Yes/No).
/// Columns: 13 numeric features, then Gender (2 levels), Field_of_Study (6)
/// and Current_Job_Level (4), then the label. One-hot encoding without
/// dropping yields 13 + 12 = 25 model inputs.
/// The label is Bernoulli(sigmoid(eta)) with eta a weighted sum of the
/// standardized Soft_Skills_Score, Networking_Score and Projects_Completed
/// (features 8, 9 and 6), scaled so the Bayes accuracy is about 0.84 and the
/// intercept set so about `positive_rate` of rows are positive.
/// Starting_Salary is log-normal with log-sd 0.225 (skewness about 0.7).
struct GradSynthSpec {
  std::size_t n = 1092;
  std::uint64_t seed = 42;
  double positive_rate = 0.5;
  double signal = 3.0;  ///< standard deviation of eta
};

inline const std::array<std::string, 13> kGradNumeric = {
    "Age",           "High_School_GPA",       "SAT_Score",          "University_Ranking", "University_GPA",
    "Internships_Completed", "Projects_Completed", "Certifications", "Soft_Skills_Score",  "Networking_Score",
    "Job_Offers",    "Starting_Salary",       "Career_Satisfaction"};
/// Indices into kGradNumeric of the features that drive the label, by
/// decreasing weight.
inline constexpr std::array<std::size_t, 3> kGradPlanted = {8, 9, 6};
inline const std::string kGradLabel = "Entrepreneurship";

/// Throws InvalidParameter for n < 50 or a rate outside (0, 1).
Table gen_grad(const GradSynthSpec& spec);

}  // namespace tabkit
