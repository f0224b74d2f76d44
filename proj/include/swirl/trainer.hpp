// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <swirl/core.hpp>
#include <swirl/serialization.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <string_view>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace swirl::toy
{

/// Sparse feature vector: (bucket, value) pairs with unique, ascending buckets.
struct Features
{
    std::vector<std::pair<std::size_t, double>> entries;

    static Features from_tokens(const std::vector<std::string>& tokens, std::size_t dimension);
};

/// Linear softmax policy over a fixed action set: pi(a|s) = softmax(theta^T phi(s)).
class SoftmaxPolicy
{
  public:
    SoftmaxPolicy(std::size_t feature_dim, std::size_t num_actions);

    std::size_t feature_dim() const noexcept { return _features; }
    std::size_t num_actions() const noexcept { return _actions; }

    /// Row-major feature_dim x num_actions.
    std::vector<double>& theta() noexcept { return _theta; }
    const std::vector<double>& theta() const noexcept { return _theta; }
    double& weight(std::size_t feature, std::size_t action) { return _theta[feature * _actions + action]; }

    std::vector<double> logits(const Features& phi) const;
    /// Numerically stable softmax.
    std::vector<double> probabilities(const Features& phi) const;
    std::size_t sample(const Features& phi, std::mt19937_64& rng) const;
    std::size_t greedy(const Features& phi) const;

  private:
    std::size_t _features;
    std::size_t _actions;
    std::vector<double> _theta;
};

/// A state of the step-wise objective with its reward for every action.
struct RewardedState
{
    Features features;
    std::vector<double> rewards; // R(a|s), one per action, each in [0, 1]
};

/// Exact J(theta) = (1/|T|) sum_s sum_a pi(a|s) R(a|s). Throws EmptyDataset.
double exact_objective(const SoftmaxPolicy& policy, const std::vector<RewardedState>& states);

/// Monte-Carlo estimate of J with `samples_per_state` draws per state. Throws EmptyDataset,
/// InvalidInput for samples_per_state < 1.
double objective_estimate(const SoftmaxPolicy& policy, const std::vector<RewardedState>& states,
                          int samples_per_state, std::mt19937_64& rng);

/// Exact gradient of exact_objective with respect to theta (dense, row-major).
std::vector<double> exact_gradient(const SoftmaxPolicy& policy, const std::vector<RewardedState>& states);

enum class Baseline
{
    none,
    /// Mean reward of the other samples in the batch (leave-one-out), independent of each
    /// sample's own action.
    batch_mean,
};

struct GradientSample
{
    std::vector<double> gradient; // dense, row-major
    double mean_reward = 0.0;
};

/// Score-function estimate (1/B) sum_j grad log pi(a_j|s_j) (R(a_j|s_j) - b_j) with one action
/// sampled per state in `batch`.
GradientSample policy_gradient_estimate(const SoftmaxPolicy& policy, const std::vector<const RewardedState*>& batch,
                                        Baseline baseline, std::mt19937_64& rng);

struct StepStats
{
    double mean_reward = 0.0;
    double gradient_norm = 0.0;
};

/// theta += learning_rate * estimate. Throws InvalidInput for learning_rate <= 0 unless it is
/// exactly zero (a no-op), NonFiniteGradient when the estimate is not finite.
StepStats policy_gradient_step(SoftmaxPolicy& policy, const std::vector<const RewardedState*>& batch,
                               double learning_rate, Baseline baseline, std::mt19937_64& rng);

/// Synthetic two-hop lookup environment. A hidden table maps each first-hop key to a second-hop
/// key and each second-hop key to a value; a question names a first-hop key and is answered by
/// the value two lookups away. Actions speak the tag protocol:
/// "<search_query>kN</search_query>" looks a key up, "<answer>vN</answer>" answers.
class ToyEnv
{
  public:
    explicit ToyEnv(std::uint64_t seed, int num_chains = 4);

    std::size_t num_actions() const noexcept { return _action_text.size(); }
    const std::string& action_text(std::size_t action) const { return _action_text.at(action); }
    std::optional<std::size_t> action_of(std::string_view completion) const;

    std::vector<SeedQuestion> questions() const;

    /// Tool response for a key lookup.
    std::string lookup(std::string_view key) const;

    /// The unique next action on the shortest solution path given what the context has revealed:
    /// look up the question key, then the key it points to, then answer.
    std::size_t oracle_action(const Messages& context) const;

    /// 1 iff the action is the oracle action.
    double step_reward(const Messages& context, std::size_t action) const;
    /// 1 iff the action answers the question correctly (outcome-only signal).
    double outcome_reward(const Messages& context, std::size_t action) const;

    /// Tokens "last:<final word of the last message>", "seen:<final word of each earlier user
    /// message>", "step:<model turns so far>" and "bias", hashed into `dimension` buckets.
    Features featurize(const Messages& context, std::size_t dimension) const;

    static constexpr int kMaxSteps = 4;

  private:
    std::string question_key(const Messages& context) const;

    std::vector<std::string> _first_keys;
    std::map<std::string, std::string> _table;
    std::vector<std::string> _action_text;
};

struct TrainConfig
{
    std::size_t feature_dim = 512;
    double learning_rate = 0.1;
    int batch_size = 32;
    int eval_every = 100;
    int num_chains = 4;
    int dataset_samples_per_question = 16; // offline trajectories per question
    int eval_episodes_per_question = 16;
    Baseline baseline = Baseline::batch_mean;
    std::uint64_t rng_seed = 7;

    ojson to_json() const;
};

struct TrainCurves
{
    std::vector<double> j_curve;                // exact step-wise J on the offline states
    std::vector<double> mean_step_reward_curve; // mean step reward of fresh on-policy rollouts
    double final_answer_rate = 0.0;
};

struct TrainReport
{
    TrainConfig config;
    std::uint64_t env_seed = 0;
    int steps = 0;
    std::size_t dataset_states = 0;
    TrainCurves stepwise;
    TrainCurves outcome_only; // same data and seeds, reward only on correct final answers

    ojson to_json() const;
};

/// Offline states for the step-wise objective: rollouts of the untrained policy through the
/// rollout engine, decomposed, exported as RL training records and re-imported.
std::vector<Messages> build_offline_contexts(const ToyEnv& env, const TrainConfig& config, std::mt19937_64& rng);

/// Deterministic given env_seed and config.rng_seed.
TrainReport train(std::uint64_t env_seed, int steps, const TrainConfig& config = {});

} // namespace swirl::toy
