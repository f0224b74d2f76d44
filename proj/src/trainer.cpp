// SPDX-License-Identifier: Apache-2.0
#include <swirl/errors.hpp>
#include <swirl/hash.hpp>
#include <swirl/model_client.hpp>
#include <swirl/pipeline.hpp>
#include <swirl/rollout.hpp>
#include <swirl/search.hpp>
#include <swirl/trainer.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace swirl::toy
{

Features Features::from_tokens(const std::vector<std::string>& tokens, std::size_t dimension)
{
    std::map<std::size_t, double> counts;
    for (const auto& token: tokens)
        counts[xxh64(token) % dimension] += 1.0;
    return Features {{counts.begin(), counts.end()}};
}

SoftmaxPolicy::SoftmaxPolicy(std::size_t feature_dim, std::size_t num_actions):
    _features(feature_dim), _actions(num_actions), _theta(feature_dim * num_actions, 0.0)
{
    if (feature_dim == 0 || num_actions == 0)
        throw InvalidInput("policy dimensions must be positive");
}

std::vector<double> SoftmaxPolicy::logits(const Features& phi) const
{
    std::vector<double> z(_actions, 0.0);
    for (const auto& [f, v]: phi.entries)
    {
        const double* row = &_theta[f * _actions];
        for (std::size_t a = 0; a < _actions; ++a)
            z[a] += v * row[a];
    }
    return z;
}

std::vector<double> SoftmaxPolicy::probabilities(const Features& phi) const
{
    auto p = logits(phi);
    const double peak = *std::max_element(p.begin(), p.end());
    double sum = 0.0;
    for (double& x: p)
    {
        x = std::exp(x - peak);
        sum += x;
    }
    for (double& x: p)
        x /= sum;
    return p;
}

std::size_t SoftmaxPolicy::sample(const Features& phi, std::mt19937_64& rng) const
{
    const auto p = probabilities(phi);
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a)
    {
        acc += p[a];
        if (u < acc)
            return a;
    }
    return p.size() - 1;
}

std::size_t SoftmaxPolicy::greedy(const Features& phi) const
{
    const auto z = logits(phi);
    return static_cast<std::size_t>(std::distance(z.begin(), std::max_element(z.begin(), z.end())));
}

double exact_objective(const SoftmaxPolicy& policy, const std::vector<RewardedState>& states)
{
    if (states.empty())
        throw EmptyDataset("objective over an empty state set");
    double total = 0.0;
    for (const auto& s: states)
    {
        const auto p = policy.probabilities(s.features);
        total += std::inner_product(p.begin(), p.end(), s.rewards.begin(), 0.0);
    }
    return total / static_cast<double>(states.size());
}

double objective_estimate(const SoftmaxPolicy& policy, const std::vector<RewardedState>& states,
                          int samples_per_state, std::mt19937_64& rng)
{
    if (states.empty())
        throw EmptyDataset("objective over an empty state set");
    if (samples_per_state < 1)
        throw InvalidInput("samples_per_state must be >= 1");
    double total = 0.0;
    for (const auto& s: states)
    {
        double sum = 0.0;
        for (int i = 0; i < samples_per_state; ++i)
            sum += s.rewards[policy.sample(s.features, rng)];
        total += sum / samples_per_state;
    }
    return total / static_cast<double>(states.size());
}

std::vector<double> exact_gradient(const SoftmaxPolicy& policy, const std::vector<RewardedState>& states)
{
    if (states.empty())
        throw EmptyDataset("gradient over an empty state set");
    const auto actions = policy.num_actions();
    std::vector<double> grad(policy.theta().size(), 0.0);
    const double inv = 1.0 / static_cast<double>(states.size());
    for (const auto& s: states)
    {
        const auto p = policy.probabilities(s.features);
        const double expected = std::inner_product(p.begin(), p.end(), s.rewards.begin(), 0.0);
        for (const auto& [f, v]: s.features.entries)
            for (std::size_t a = 0; a < actions; ++a)
                grad[f * actions + a] += inv * v * p[a] * (s.rewards[a] - expected);
    }
    return grad;
}

GradientSample policy_gradient_estimate(const SoftmaxPolicy& policy, const std::vector<const RewardedState*>& batch,
                                        Baseline baseline, std::mt19937_64& rng)
{
    if (batch.empty())
        throw EmptyDataset("empty batch");
    const auto actions = policy.num_actions();
    const auto b = batch.size();

    std::vector<std::size_t> chosen(b);
    std::vector<std::vector<double>> probs(b);
    std::vector<double> rewards(b);
    double reward_sum = 0.0;
    for (std::size_t j = 0; j < b; ++j)
    {
        probs[j] = policy.probabilities(batch[j]->features);
        chosen[j] = policy.sample(batch[j]->features, rng);
        rewards[j] = batch[j]->rewards[chosen[j]];
        reward_sum += rewards[j];
    }

    GradientSample out;
    out.gradient.assign(policy.theta().size(), 0.0);
    out.mean_reward = reward_sum / static_cast<double>(b);
    for (std::size_t j = 0; j < b; ++j)
    {
        double base = 0.0;
        if (baseline == Baseline::batch_mean && b > 1)
            base = (reward_sum - rewards[j]) / static_cast<double>(b - 1);
        const double advantage = (rewards[j] - base) / static_cast<double>(b);
        if (advantage == 0.0)
            continue;
        for (const auto& [f, v]: batch[j]->features.entries)
        {
            double* row = &out.gradient[f * actions];
            for (std::size_t a = 0; a < actions; ++a)
                row[a] += v * ((a == chosen[j] ? 1.0 : 0.0) - probs[j][a]) * advantage;
        }
    }
    return out;
}

StepStats policy_gradient_step(SoftmaxPolicy& policy, const std::vector<const RewardedState*>& batch,
                               double learning_rate, Baseline baseline, std::mt19937_64& rng)
{
    if (learning_rate < 0.0 || !std::isfinite(learning_rate))
        throw InvalidInput("learning rate must be positive");
    auto estimate = policy_gradient_estimate(policy, batch, baseline, rng);
    double norm2 = 0.0;
    for (const double g: estimate.gradient)
        norm2 += g * g;
    if (!std::isfinite(norm2))
        throw NonFiniteGradient("policy gradient is not finite");
    if (learning_rate > 0.0)
    {
        auto& theta = policy.theta();
        for (std::size_t i = 0; i < theta.size(); ++i)
            theta[i] += learning_rate * estimate.gradient[i];
    }
    return {estimate.mean_reward, std::sqrt(norm2)};
}

// ---------------------------------------------------------------------------

ToyEnv::ToyEnv(std::uint64_t seed, int num_chains)
{
    if (num_chains < 1)
        throw InvalidInput("toy environment needs at least one chain");
    const auto n = static_cast<std::size_t>(num_chains);
    std::mt19937_64 rng(seed);

    std::vector<std::string> keys;
    for (std::size_t i = 0; i < 2 * n; ++i)
        keys.push_back("k" + std::to_string(i));
    std::vector<std::string> values;
    for (std::size_t i = 0; i < n; ++i)
        values.push_back("v" + std::to_string(i));

    auto shuffled = keys;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto value_order = values;
    std::shuffle(value_order.begin(), value_order.end(), rng);

    for (std::size_t i = 0; i < n; ++i)
    {
        const auto& first = shuffled[i];
        const auto& second = shuffled[n + i];
        _first_keys.push_back(first);
        _table[first] = second;
        _table[second] = value_order[i];
    }
    std::sort(_first_keys.begin(), _first_keys.end());

    for (const auto& k: keys)
        _action_text.push_back("<search_query>" + k + "</search_query>");
    for (const auto& v: values)
        _action_text.push_back("<answer>" + v + "</answer>");
}

std::optional<std::size_t> ToyEnv::action_of(std::string_view completion) const
{
    const auto it = std::find(_action_text.begin(), _action_text.end(), completion);
    if (it == _action_text.end())
        return std::nullopt;
    return static_cast<std::size_t>(std::distance(_action_text.begin(), it));
}

std::vector<SeedQuestion> ToyEnv::questions() const
{
    std::vector<SeedQuestion> out;
    for (const auto& k: _first_keys)
        out.push_back({"q-" + k, k, _table.at(_table.at(k)), TaskKind::search_qa});
    return out;
}

std::string ToyEnv::lookup(std::string_view key) const
{
    const auto it = _table.find(std::string(key));
    return it == _table.end() ? std::string("ERROR: unknown key") : it->second;
}

std::string ToyEnv::question_key(const Messages& context) const
{
    if (context.empty())
        throw InvalidInput("empty toy context");
    const auto words = tokenize_words(context.front().content);
    if (words.empty())
        throw InvalidInput("toy context has no question");
    return words.back();
}

std::size_t ToyEnv::oracle_action(const Messages& context) const
{
    const auto first = question_key(context);
    const auto second = _table.at(first);
    std::set<std::string> looked_up;
    for (const auto& m: context)
    {
        if (m.role != Role::model)
            continue;
        const auto parsed = extract_action(m.content);
        if (const auto* call = std::get_if<ToolCall>(&parsed))
            looked_up.insert(call->payload);
    }

    std::string next;
    if (!looked_up.contains(first))
        next = "<search_query>" + first + "</search_query>";
    else if (!looked_up.contains(second))
        next = "<search_query>" + second + "</search_query>";
    else
        next = "<answer>" + _table.at(second) + "</answer>";
    return *action_of(next);
}

double ToyEnv::step_reward(const Messages& context, std::size_t action) const
{
    return action == oracle_action(context) ? 1.0 : 0.0;
}

double ToyEnv::outcome_reward(const Messages& context, std::size_t action) const
{
    const auto answer = "<answer>" + _table.at(_table.at(question_key(context))) + "</answer>";
    return action_text(action) == answer ? 1.0 : 0.0;
}

Features ToyEnv::featurize(const Messages& context, std::size_t dimension) const
{
    std::vector<std::string> tokens {"bias"};
    int model_turns = 0;
    for (std::size_t i = 0; i < context.size(); ++i)
    {
        const auto& m = context[i];
        if (m.role == Role::model)
        {
            ++model_turns;
            continue;
        }
        const auto words = tokenize_words(m.content);
        if (words.empty())
            continue;
        tokens.push_back((i + 1 == context.size() ? "last:" : "seen:") + words.back());
    }
    tokens.push_back("step:" + std::to_string(model_turns));
    return Features::from_tokens(tokens, dimension);
}

// ---------------------------------------------------------------------------

ojson TrainConfig::to_json() const
{
    ojson o;
    o["feature_dim"] = feature_dim;
    o["learning_rate"] = learning_rate;
    o["batch_size"] = batch_size;
    o["eval_every"] = eval_every;
    o["num_chains"] = num_chains;
    o["dataset_samples_per_question"] = dataset_samples_per_question;
    o["eval_episodes_per_question"] = eval_episodes_per_question;
    o["baseline"] = baseline == Baseline::batch_mean ? "batch_mean" : "none";
    o["rng_seed"] = rng_seed;
    return o;
}

namespace
{

ojson curves_json(const TrainCurves& c)
{
    ojson o;
    o["j_curve"] = c.j_curve;
    o["mean_step_reward_curve"] = c.mean_step_reward_curve;
    o["final_answer_rate"] = c.final_answer_rate;
    return o;
}

class LookupTool final: public Tool
{
  public:
    explicit LookupTool(const ToyEnv& env): _env(env) {}
    ToolKind kind() const override { return ToolKind::search_query; }
    std::string execute(std::string_view payload) override { return _env.lookup(payload); }

  private:
    const ToyEnv& _env;
};

std::vector<Trajectory> rollouts(const ToyEnv& env, const SoftmaxPolicy& policy, std::size_t feature_dim,
                                 int per_question, std::mt19937_64& rng)
{
    FunctionChatModel model("toy-policy", [&](const Messages& messages, const SamplingParams&) {
        return env.action_text(policy.sample(env.featurize(messages, feature_dim), rng));
    });
    Toolbox tools;
    tools.add(std::make_shared<LookupTool>(env));
    RolloutLimits limits;
    limits.max_steps = ToyEnv::kMaxSteps;
    limits.malformed_retries = 0;
    limits.samples_per_seed = per_question;
    BatchOptions options;
    options.workers = 1;
    options.max_abort_rate = 1.0;
    return run_batch(env.questions(), limits, model, tools, SamplingParams::generation(), options).trajectories;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b)
{
    return xxh64(std::to_string(a) + ":" + std::to_string(b));
}

} // namespace

ojson TrainReport::to_json() const
{
    ojson o;
    o["config"] = config.to_json();
    o["seeds"] = {{"env_seed", env_seed}, {"rng_seed", config.rng_seed}};
    o["steps"] = steps;
    o["dataset_states"] = dataset_states;
    o["j_curve"] = stepwise.j_curve;
    o["mean_step_reward_curve"] = stepwise.mean_step_reward_curve;
    o["final_answer_rate"] = stepwise.final_answer_rate;
    o["paired_outcome_only"] = curves_json(outcome_only);
    return o;
}

std::vector<Messages> build_offline_contexts(const ToyEnv& env, const TrainConfig& config, std::mt19937_64& rng)
{
    const SoftmaxPolicy initial(config.feature_dim, env.num_actions());
    std::vector<SubTrajectory> subs;
    for (const auto& t: rollouts(env, initial, config.feature_dim, config.dataset_samples_per_question, rng))
    {
        for (auto& sub: decompose(t))
        {
            const auto action = env.action_of(sub.target_action.raw_completion);
            sub.step_reward = action ? env.step_reward(sub.context.messages, *action) : 0.0;
            subs.push_back(std::move(sub));
        }
    }
    std::vector<Messages> contexts;
    for (auto& record: import_training_records(export_training_records(subs, ExportFormat::rl)))
        contexts.push_back(std::move(record.context));
    return contexts;
}

TrainReport train(std::uint64_t env_seed, int steps, const TrainConfig& config)
{
    if (steps < 0)
        throw InvalidInput("steps must be >= 0");
    if (config.batch_size < 1 || config.eval_every < 1 || config.feature_dim == 0)
        throw InvalidInput("invalid trainer configuration");

    const ToyEnv env(env_seed, config.num_chains);
    std::mt19937_64 data_rng(mix(config.rng_seed, env_seed));
    const auto contexts = build_offline_contexts(env, config, data_rng);
    if (contexts.empty())
        throw EmptyDataset("toy rollouts produced no states");

    const auto make_states = [&](bool stepwise) {
        std::vector<RewardedState> states;
        states.reserve(contexts.size());
        for (const auto& ctx: contexts)
        {
            RewardedState s {env.featurize(ctx, config.feature_dim), std::vector<double>(env.num_actions())};
            for (std::size_t a = 0; a < env.num_actions(); ++a)
                s.rewards[a] = stepwise ? env.step_reward(ctx, a) : env.outcome_reward(ctx, a);
            states.push_back(std::move(s));
        }
        return states;
    };
    const auto step_states = make_states(true);
    const auto outcome_states = make_states(false);

    const auto run = [&](const std::vector<RewardedState>& train_states) {
        SoftmaxPolicy policy(config.feature_dim, env.num_actions());
        std::mt19937_64 rng(mix(config.rng_seed + 1, env_seed));
        std::uniform_int_distribution<std::size_t> pick(0, train_states.size() - 1);
        TrainCurves curves;
        int eval_index = 0;

        const auto evaluate = [&] {
            curves.j_curve.push_back(exact_objective(policy, step_states));
            std::mt19937_64 eval_rng(mix(config.rng_seed + 2, static_cast<std::uint64_t>(eval_index++)));
            const auto episodes = rollouts(env, policy, config.feature_dim, config.eval_episodes_per_question, eval_rng);
            double reward = 0.0;
            std::size_t actions = 0;
            std::size_t correct = 0;
            for (const auto& t: episodes)
            {
                for (const auto& step: t.steps)
                {
                    const auto a = env.action_of(step.action.raw_completion);
                    reward += a ? env.step_reward(step.state.messages, *a) : 0.0;
                    ++actions;
                }
                if (t.final_answer() && t.final_answer() == t.seed.golden_answer)
                    ++correct;
            }
            curves.mean_step_reward_curve.push_back(actions ? reward / static_cast<double>(actions) : 0.0);
            curves.final_answer_rate = episodes.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(episodes.size());
        };

        evaluate();
        std::vector<const RewardedState*> batch(static_cast<std::size_t>(config.batch_size));
        for (int s = 1; s <= steps; ++s)
        {
            for (auto& slot: batch)
                slot = &train_states[pick(rng)];
            policy_gradient_step(policy, batch, config.learning_rate, config.baseline, rng);
            if (s % config.eval_every == 0 || s == steps)
                evaluate();
        }
        return curves;
    };

    TrainReport report;
    report.config = config;
    report.env_seed = env_seed;
    report.steps = steps;
    report.dataset_states = contexts.size();
    report.stepwise = run(step_states);
    report.outcome_only = run(outcome_states);
    return report;
}

} // namespace swirl::toy
