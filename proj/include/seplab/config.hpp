// config.hpp — key=value training configuration files.
//
// Format: one `key = value` pair per line, `#` starts a comment, blank lines
// ignored. Lists are comma-separated. Unknown keys are rejected. The full key
// set is documented in docs/reference.md.

#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "seplab/core.hpp"
#include "seplab/training.hpp"

namespace seplab {

struct RunSpec {
    TrainConfig train;
    std::string train_data;  // dataset spec string
    std::string test_data;
    AttackConfig eval_attack;     // evaluate-time attack (epsilon from inner)
    LipschitzConfig eval_lipschitz;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw InputError("config key '" + key + "': bad real value '" + v + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw InputError("config key '" + key + "': bad integer value '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw InputError("config key '" + key + "': bad boolean value '" + v + "'");
}

template <typename T, typename Fn>
std::vector<T> parse_list(const std::string& key, const std::string& v, Fn fn) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(static_cast<T>(fn(key, item)));
    }
    return out;
}

}  // namespace detail

inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw FormatError("config line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key))
            throw FormatError("config: duplicate key '" + key + "'");
        kv[key] = value;
    }
    return kv;
}

inline RunSpec run_spec_from_key_values(std::map<std::string, std::string> kv) {
    RunSpec spec;
    spec.train.method.inner.random_start = true;  // training-time default

    auto take = [&kv](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) return std::pair<bool, std::string>{false, ""};
        std::string v = it->second;
        kv.erase(it);
        return std::pair<bool, std::string>{true, v};
    };

    using detail::parse_bool;
    using detail::parse_int;
    using detail::parse_list;
    using detail::parse_real;

    if (auto [ok, v] = take("method"); ok) spec.train.method.kind = method_from_name(v);
    if (auto [ok, v] = take("trades.beta"); ok)
        spec.train.method.beta = parse_real("trades.beta", v);
    if (auto [ok, v] = take("gr.beta"); ok)
        spec.train.method.beta = parse_real("gr.beta", v);
    if (auto [ok, v] = take("rst.lambda"); ok)
        spec.train.method.lambda = parse_real("rst.lambda", v);
    if (auto [ok, v] = take("llr.lambda"); ok)
        spec.train.method.lambda = parse_real("llr.lambda", v);
    if (auto [ok, v] = take("llr.mu"); ok) spec.train.method.mu = parse_real("llr.mu", v);
    if (auto [ok, v] = take("gr.fd_step"); ok)
        spec.train.method.fd_step = parse_real("gr.fd_step", v);
    if (auto [ok, v] = take("llr.fd_scale"); ok)
        spec.train.method.fd_scale = parse_real("llr.fd_scale", v);

    if (auto [ok, v] = take("inner.epsilon"); ok)
        spec.train.method.inner.epsilon = parse_real("inner.epsilon", v);
    if (auto [ok, v] = take("inner.steps"); ok)
        spec.train.method.inner.steps = int(parse_int("inner.steps", v));
    if (auto [ok, v] = take("inner.step_size"); ok)
        spec.train.method.inner.step_size = parse_real("inner.step_size", v);
    if (auto [ok, v] = take("inner.random_start"); ok)
        spec.train.method.inner.random_start = parse_bool("inner.random_start", v);

    if (auto [ok, v] = take("net.hidden"); ok)
        spec.train.hidden = parse_list<std::size_t>("net.hidden", v, parse_int);
    if (auto [ok, v] = take("net.dropout"); ok)
        spec.train.dropout_rate = parse_real("net.dropout", v);

    if (auto [ok, v] = take("train.epochs"); ok)
        spec.train.epochs = int(parse_int("train.epochs", v));
    if (auto [ok, v] = take("train.batch_size"); ok)
        spec.train.batch_size = std::size_t(parse_int("train.batch_size", v));
    if (auto [ok, v] = take("train.lr"); ok) spec.train.lr = parse_real("train.lr", v);
    if (auto [ok, v] = take("train.momentum"); ok)
        spec.train.momentum = parse_real("train.momentum", v);
    if (auto [ok, v] = take("train.decay_epochs"); ok)
        spec.train.decay_epochs = parse_list<int>("train.decay_epochs", v, parse_int);
    if (auto [ok, v] = take("train.decay_factor"); ok)
        spec.train.decay_factor = parse_real("train.decay_factor", v);
    if (auto [ok, v] = take("train.seed"); ok)
        spec.train.seed = std::uint64_t(parse_int("train.seed", v));
    if (auto [ok, v] = take("train.include_test"); ok)
        spec.train.include_test_in_train = parse_bool("train.include_test", v);

    if (auto [ok, v] = take("data.train"); ok) spec.train_data = v;
    if (auto [ok, v] = take("data.test"); ok) spec.test_data = v;

    if (!kv.empty()) throw InputError("config: unknown key '" + kv.begin()->first + "'");
    if (spec.train_data.empty() || spec.test_data.empty())
        throw InputError("config: data.train and data.test are required");

    spec.eval_attack = spec.train.method.inner;
    spec.eval_attack.random_start = false;  // evaluation-time default
    spec.eval_lipschitz.epsilon = spec.train.method.inner.epsilon;
    return spec;
}

inline RunSpec load_run_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config file: " + path);
    return run_spec_from_key_values(parse_key_values(in));
}

}  // namespace seplab
