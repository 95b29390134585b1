#include "gsamp/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gsamp/errors.hpp"

namespace gsamp {
namespace {

struct Entry {
    std::string key;
    std::string value;
    int line = 0;
};

[[noreturn]] void fail(const std::string& origin, int line, const std::string& message) {
    std::ostringstream msg;
    msg << origin << ": line " << line << ": " << message;
    throw config_error(msg.str());
}

std::string trim(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

long long parse_int(const Entry& e, const std::string& origin) {
    const char* begin = e.value.c_str();
    char* end = nullptr;
    const long long value = std::strtoll(begin, &end, 10);
    if (e.value.empty() || end != begin + e.value.size())
        fail(origin, e.line, "key '" + e.key + "' expects an integer, got '" + e.value + "'");
    return value;
}

long long parse_int_min(const Entry& e, const std::string& origin, long long min_value) {
    const long long value = parse_int(e, origin);
    if (value < min_value) {
        std::ostringstream msg;
        msg << "key '" << e.key << "' must be >= " << min_value << ", got " << value;
        fail(origin, e.line, msg.str());
    }
    return value;
}

std::uint64_t parse_uint64(const Entry& e, const std::string& origin) {
    const char* begin = e.value.c_str();
    char* end = nullptr;
    const unsigned long long value = std::strtoull(begin, &end, 10);
    if (e.value.empty() || e.value[0] == '-' || end != begin + e.value.size())
        fail(origin, e.line,
             "key '" + e.key + "' expects a non-negative integer, got '" + e.value + "'");
    return value;
}

double parse_real(const Entry& e, const std::string& origin) {
    const char* begin = e.value.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (e.value.empty() || end != begin + e.value.size() || !std::isfinite(value))
        fail(origin, e.line, "key '" + e.key + "' expects a finite number, got '" + e.value + "'");
    return value;
}

bool parse_bool(const Entry& e, const std::string& origin) {
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    fail(origin, e.line, "key '" + e.key + "' expects true/false, got '" + e.value + "'");
}

EstimatorSpec build_estimator(const std::vector<Entry>& entries, const std::string& origin,
                              int section_line, int default_cheb_order) {
    std::map<std::string, Entry> byKey;
    for (const auto& e : entries) {
        if (!byKey.emplace(e.key, e).second)
            fail(origin, e.line, "duplicate key '" + e.key + "' in estimator section");
    }
    auto take = [&](const std::string& key) -> const Entry* {
        auto it = byKey.find(key);
        if (it == byKey.end()) return nullptr;
        return &it->second;
    };

    EstimatorSpec spec;

    const Entry* name = take("name");
    if (!name || name->value.empty())
        fail(origin, section_line, "estimator section requires a non-empty 'name'");
    spec.name = name->value;

    const Entry* kind = take("kind");
    if (!kind) fail(origin, section_line, "estimator section requires 'kind'");
    if (kind->value == "gsamp") spec.kind = EstimatorKind::Gsamp;
    else if (kind->value == "glms") spec.kind = EstimatorKind::Glms;
    else if (kind->value == "gsign") spec.kind = EstimatorKind::GSign;
    else if (kind->value == "gdlms") spec.kind = EstimatorKind::Gdlms;
    else if (kind->value == "gsd") spec.kind = EstimatorKind::Gsd;
    else
        fail(origin, kind->line,
             "unknown kind '" + kind->value + "' (expected gsamp, glms, gsign, gdlms or gsd)");

    const bool is_gsamp = spec.kind == EstimatorKind::Gsamp;
    const bool has_cheb = spec.kind == EstimatorKind::Gdlms || spec.kind == EstimatorKind::Gsd;

    if (is_gsamp) {
        spec.mode = ErrorMode::Sign;
        if (const Entry* e = take("error_mode")) {
            if (e->value == "lms") spec.mode = ErrorMode::Lms;
            else if (e->value == "sign") spec.mode = ErrorMode::Sign;
            else fail(origin, e->line, "error_mode must be lms or sign, got '" + e->value + "'");
        }
        spec.aggregator = AggregatorKind::Sum;
        if (const Entry* e = take("aggregator")) {
            if (e->value == "sum") spec.aggregator = AggregatorKind::Sum;
            else if (e->value == "median") spec.aggregator = AggregatorKind::Median;
            else if (e->value == "smooth") spec.aggregator = AggregatorKind::Smooth;
            else if (e->value == "global") spec.aggregator = AggregatorKind::GlobalFilter;
            else
                fail(origin, e->line,
                     "aggregator must be sum, median, smooth or global, got '" + e->value + "'");
        }
        switch (spec.aggregator) {
            case AggregatorKind::Sum: spec.weights = WeightScheme{1.0, 0.0, 2.0, 0.0, false}; break;
            case AggregatorKind::Median:
                spec.weights = WeightScheme{0.7, 0.0, 0.7, 0.0, false};
                break;
            case AggregatorKind::Smooth:
                spec.weights = WeightScheme{0.7, 0.0, 1.95, 0.0, false};
                break;
            case AggregatorKind::GlobalFilter: break;
        }
        if (const Entry* e = take("w1")) spec.weights.w1 = parse_real(*e, origin);
        if (const Entry* e = take("w2")) spec.weights.w2 = parse_real(*e, origin);
        if (const Entry* e = take("w3")) spec.weights.w3 = parse_real(*e, origin);
        if (const Entry* e = take("w4")) spec.weights.w4 = parse_real(*e, origin);
        if (const Entry* e = take("normalize_by_degree")) {
            if (spec.aggregator != AggregatorKind::Sum)
                fail(origin, e->line, "normalize_by_degree applies only to the sum aggregator");
            spec.weights.normalize_by_degree = parse_bool(*e, origin);
        }
        if (const Entry* e = take("step_size")) {
            if (spec.aggregator != AggregatorKind::GlobalFilter)
                fail(origin, e->line,
                     "step_size applies only to gsamp with the global aggregator");
            spec.step_size = parse_real(*e, origin);
        } else {
            spec.step_size = 1.6;
        }
        if (const Entry* e = take("khop"))
            spec.khop = static_cast<int>(parse_int_min(*e, origin, 1));
    } else {
        spec.step_size = (spec.kind == EstimatorKind::GSign) ? 1.3 : 1.6;
        if (const Entry* e = take("step_size")) spec.step_size = parse_real(*e, origin);
    }

    spec.cheb_order = default_cheb_order;
    if (const Entry* e = take("cheb_order")) {
        if (!has_cheb)
            fail(origin, e->line, "cheb_order applies only to gdlms and gsd estimators");
        spec.cheb_order = static_cast<int>(parse_int_min(*e, origin, 1));
    }

    if (!(spec.step_size > 0.0)) {
        const Entry* e = take("step_size");
        fail(origin, e ? e->line : section_line, "step_size must be positive");
    }

    static const std::set<std::string> known = {
        "name", "kind",       "error_mode", "aggregator", "w1",
        "w2",   "w3",         "w4",         "normalize_by_degree",
        "step_size", "cheb_order", "khop"};
    for (const auto& e : entries) {
        if (!known.count(e.key))
            fail(origin, e.line, "unknown key '" + e.key + "' in estimator section");
        // Keys that are known but invalid for this kind were consumed above;
        // anything left untouched for a non-gsamp kind is a schema violation.
        if (!is_gsamp &&
            (e.key == "error_mode" || e.key == "aggregator" || e.key == "w1" || e.key == "w2" ||
             e.key == "w3" || e.key == "w4" || e.key == "normalize_by_degree" || e.key == "khop"))
            fail(origin, e.line, "key '" + e.key + "' applies only to gsamp estimators");
    }
    return spec;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    std::vector<Entry> global_entries;
    std::vector<std::pair<int, std::vector<Entry>>> sections;  // (header line, entries)
    bool in_section = false;

    std::istringstream stream(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(stream, raw)) {
        ++line_no;
        std::string line = raw;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, line_no, "unterminated section header");
            const std::string section = trim(line.substr(1, line.size() - 2));
            if (section != "estimator")
                fail(origin, line_no, "unknown section '[" + section + "]'");
            sections.emplace_back(line_no, std::vector<Entry>{});
            in_section = true;
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(origin, line_no, "expected 'key = value'");
        Entry entry{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
        if (entry.key.empty()) fail(origin, line_no, "empty key");
        if (in_section) sections.back().second.push_back(entry);
        else global_entries.push_back(entry);
    }

    RunConfig config;
    int default_cheb_order = 10;
    const Entry* omega_min_entry = nullptr;
    const Entry* omega_max_entry = nullptr;

    std::set<std::string> seen;
    for (const auto& e : global_entries) {
        if (!seen.insert(e.key).second) fail(origin, e.line, "duplicate key '" + e.key + "'");
        if (e.key == "seed") config.seed = parse_uint64(e, origin);
        else if (e.key == "trials") config.trials = static_cast<int>(parse_int_min(e, origin, 1));
        else if (e.key == "graph_k") config.graph_k = static_cast<int>(parse_int_min(e, origin, 1));
        else if (e.key == "observed") config.observed = static_cast<int>(parse_int_min(e, origin, 0));
        else if (e.key == "bandwidth")
            config.bandwidth = static_cast<int>(parse_int_min(e, origin, 0));
        else if (e.key == "cutoff_ratio") {
            config.cutoff_ratio = parse_real(e, origin);
            if (!(config.cutoff_ratio > 0.0 && config.cutoff_ratio <= 1.0))
                fail(origin, e.line, "cutoff_ratio must lie in (0, 1]");
        } else if (e.key == "khop") config.khop = static_cast<int>(parse_int_min(e, origin, 1));
        else if (e.key == "stability_guard") config.stability_guard = parse_bool(e, origin);
        else if (e.key == "noise_alpha") {
            config.noise.alpha = parse_real(e, origin);
            if (!(config.noise.alpha > 0.0 && config.noise.alpha <= 2.0))
                fail(origin, e.line, "noise_alpha must lie in (0, 2]");
        } else if (e.key == "noise_gamma") {
            config.noise.gamma = parse_real(e, origin);
            if (!(config.noise.gamma > 0.0)) fail(origin, e.line, "noise_gamma must be positive");
        } else if (e.key == "noise_mu") config.noise.mu = parse_real(e, origin);
        else if (e.key == "threads") config.threads = static_cast<int>(parse_int_min(e, origin, 1));
        else if (e.key == "log_scale") config.log_scale = parse_bool(e, origin);
        else if (e.key == "cheb_order")
            default_cheb_order = static_cast<int>(parse_int_min(e, origin, 1));
        else if (e.key == "synth_nodes")
            config.synth_nodes = static_cast<int>(parse_int_min(e, origin, 2));
        else if (e.key == "synth_steps")
            config.synth_steps = static_cast<int>(parse_int_min(e, origin, 2));
        else if (e.key == "synth_bandwidth")
            config.synth.bandwidth = static_cast<int>(parse_int_min(e, origin, 0));
        else if (e.key == "synth_rms") {
            config.synth.target_rms = parse_real(e, origin);
            if (!(config.synth.target_rms > 0.0))
                fail(origin, e.line, "synth_rms must be positive");
        } else if (e.key == "synth_omega_min") {
            config.synth.omega_min = parse_real(e, origin);
            omega_min_entry = &e;
        } else if (e.key == "synth_omega_max") {
            config.synth.omega_max = parse_real(e, origin);
            omega_max_entry = &e;
        } else fail(origin, e.line, "unknown key '" + e.key + "'");
    }

    if (config.synth.omega_min < 0.0)
        fail(origin, omega_min_entry ? omega_min_entry->line : 1, "synth_omega_min must be >= 0");
    if (config.synth.omega_max < config.synth.omega_min) {
        const Entry* e = omega_max_entry ? omega_max_entry : omega_min_entry;
        fail(origin, e ? e->line : 1, "synth_omega_max must be >= synth_omega_min");
    }

    std::set<std::string> names;
    for (const auto& [header_line, entries] : sections) {
        EstimatorSpec spec = build_estimator(entries, origin, header_line, default_cheb_order);
        if (!names.insert(spec.name).second)
            fail(origin, header_line, "duplicate estimator name '" + spec.name + "'");
        config.estimators.push_back(std::move(spec));
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

std::vector<EstimatorSpec> canonical_estimators(ErrorMode gsamp_mode, int cheb_order) {
    std::vector<EstimatorSpec> specs;

    auto gsamp = [&](const std::string& name, AggregatorKind aggregator, WeightScheme weights) {
        EstimatorSpec spec;
        spec.name = name;
        spec.kind = EstimatorKind::Gsamp;
        spec.mode = gsamp_mode;
        spec.aggregator = aggregator;
        spec.weights = weights;
        specs.push_back(spec);
    };
    gsamp("GSAMP-sum", AggregatorKind::Sum, WeightScheme{1.0, 0.0, 2.0, 0.0, false});
    gsamp("GSAMP-median", AggregatorKind::Median, WeightScheme{0.7, 0.0, 0.7, 0.0, false});
    gsamp("GSAMP-smooth", AggregatorKind::Smooth, WeightScheme{0.7, 0.0, 1.95, 0.0, false});

    auto filtered = [&](const std::string& name, EstimatorKind kind, double step) {
        EstimatorSpec spec;
        spec.name = name;
        spec.kind = kind;
        spec.step_size = step;
        spec.cheb_order = cheb_order;
        specs.push_back(spec);
    };
    filtered("GLMS", EstimatorKind::Glms, 1.6);
    filtered("G-Sign", EstimatorKind::GSign, 1.3);
    filtered("GDLMS", EstimatorKind::Gdlms, 1.6);
    filtered("GSD", EstimatorKind::Gsd, 1.6);
    return specs;
}

}  // namespace gsamp
