#pragma once

#include "hhrl/core/levels.hpp"

namespace hhrl {

// Challenge reward: +level while the attempt stays within the mistake
// allowance (mistakes <= threshold), -level once it is exceeded.
int loc_reward(ChallengeLevel level, int mistakes, int mistake_threshold);

// Feedback reward: -level / (mistakes + helps + 1), plus 5 while the attempt
// stays within the mistake allowance. The bail-out level is never rewarded and
// raises ContractViolation.
double lof_reward(FeedbackLevel level, int mistakes, int help_requests, int mistake_threshold);

// Bounds of lof_reward over the learned levels for a given threshold:
// the minimum is -4 / (threshold + 2); the supremum 5 is never reached.
double lof_reward_min(int mistake_threshold);
inline constexpr double kLofRewardSup = 5.0;

// Affine map of a feedback reward onto [0, 1] for presentation.
double normalize_lof_reward(double reward, int mistake_threshold);

}  // namespace hhrl
