#include "relaychain/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "relaychain/errors.hpp"
#include "text.hpp"

namespace relaychain {

std::string_view version() { return RELAYCHAIN_VERSION_STRING; }

namespace {

constexpr std::pair<Experiment, std::string_view> kExperimentNames[] = {
    {Experiment::mean_vs_N, "mean_vs_N"},
    {Experiment::var_vs_N_fixed_span, "var_vs_N_fixed_span"},
    {Experiment::var_vs_N_fixed_hop, "var_vs_N_fixed_hop"},
    {Experiment::cov_vs_distance, "cov_vs_distance"},
    {Experiment::speed_vs_L, "speed_vs_L"},
    {Experiment::pmf, "pmf"},
    {Experiment::validate, "validate"},
};

constexpr std::string_view kKeys[] = {
    "experiment", "lambda",  "p",      "theta",     "alpha", "path_loss",       "N",
    "L",          "span",    "mode",   "distances", "t_max", "rel_tol",         "abs_tol",
    "trials",     "seed",    "slot_cap", "pmf_term_budget", "mass_tolerance", "threshold",
};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Item {
    std::string text;
    bool range = false;
    long long lo = 0, hi = 0;
};

struct Value {
    std::vector<Item> items;
    bool list = false;
    int line = 0;
};

template <class T>
bool parse_number(std::string_view s, T& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

Item parse_item(std::string_view s, int line) {
    s = trim(s);
    if (s.empty()) throw ConfigError("empty value", line);
    Item it{std::string(s)};
    if (const auto dots = s.find(".."); dots != std::string_view::npos) {
        if (!parse_number(trim(s.substr(0, dots)), it.lo) || !parse_number(trim(s.substr(dots + 2)), it.hi))
            throw ConfigError("malformed integer range '" + it.text + "'", line);
        if (it.hi < it.lo) throw ConfigError("empty range '" + it.text + "'", line);
        if (it.hi - it.lo > 1'000'000) throw ConfigError("range '" + it.text + "' is too long", line);
        it.range = true;
    }
    return it;
}

Value parse_value(std::string_view s, int line) {
    Value v;
    v.line = line;
    if (s.empty()) throw ConfigError("missing value", line);
    if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError("unterminated list", line);
        v.list = true;
        std::string_view body = trim(s.substr(1, s.size() - 2));
        if (body.empty()) throw ConfigError("empty list", line);
        while (true) {
            const auto comma = body.find(',');
            v.items.push_back(parse_item(body.substr(0, comma), line));
            if (comma == std::string_view::npos) break;
            body = body.substr(comma + 1);
        }
    } else {
        v.items.push_back(parse_item(s, line));
    }
    return v;
}

std::string_view scalar(const Value& v, std::string_view key) {
    if (v.list || v.items.size() != 1 || v.items[0].range)
        throw ConfigError("'" + std::string(key) + "' takes a single value", v.line);
    return v.items[0].text;
}

double to_double(std::string_view text, std::string_view key, int line) {
    double x = 0.0;
    if (!parse_number(text, x) || !std::isfinite(x))
        throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(text) + "'", line);
    return x;
}

template <class Int>
Int to_integer(std::string_view text, std::string_view key, int line) {
    Int x = 0;
    if (!parse_number(text, x))
        throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(text) + "'", line);
    return x;
}

std::vector<double> doubles(const Value& v, std::string_view key) {
    std::vector<double> out;
    for (const Item& it : v.items) {
        if (it.range)
            for (long long k = it.lo; k <= it.hi; ++k) out.push_back(static_cast<double>(k));
        else
            out.push_back(to_double(it.text, key, v.line));
    }
    return out;
}

std::vector<int> integers(const Value& v, std::string_view key) {
    std::vector<int> out;
    for (const Item& it : v.items) {
        if (it.range)
            for (long long k = it.lo; k <= it.hi; ++k) out.push_back(static_cast<int>(k));
        else
            out.push_back(to_integer<int>(it.text, key, v.line));
    }
    return out;
}

std::vector<InterferenceMode> modes(const Value& v) {
    if (!v.list && v.items.size() == 1 && v.items[0].text == "both")
        return {InterferenceMode::dependent, InterferenceMode::independent};
    std::vector<InterferenceMode> out;
    for (const Item& it : v.items) {
        try {
            out.push_back(parse_mode(it.text));
        } catch (const ModelError&) {
            throw ConfigError("'mode' expects dependent, independent or both, got '" + it.text + "'", v.line);
        }
    }
    return out;
}

// Per-key range checks; throw ConfigError without a line number.
void check_key(const ExperimentConfig& c, std::string_view key) {
    auto fail = [&](const std::string& what) { throw ConfigError("'" + std::string(key) + "' " + what); };
    auto nonempty = [&](std::size_t n) {
        if (n == 0) fail("must not be empty");
    };
    if (key == "lambda") {
        nonempty(c.lambda.size());
        for (double x : c.lambda)
            if (!(x >= 0.0)) fail("must be >= 0, got " + detail::format_double(x));
    } else if (key == "p") {
        nonempty(c.p.size());
        for (double x : c.p)
            if (!(x >= 0.0 && x <= 1.0)) fail("must lie in [0, 1], got " + detail::format_double(x));
    } else if (key == "theta") {
        nonempty(c.theta.size());
        for (double x : c.theta)
            if (!(x > 0.0)) fail("must be > 0, got " + detail::format_double(x));
    } else if (key == "alpha") {
        nonempty(c.alpha.size());
        for (double x : c.alpha)
            if (!(x > 2.0)) fail("must be > 2, got " + detail::format_double(x));
    } else if (key == "N") {
        nonempty(c.N.size());
        for (int x : c.N)
            if (x < 1) fail("must be >= 1, got " + std::to_string(x));
    } else if (key == "L") {
        if (!c.span) nonempty(c.L.size());
        for (double x : c.L)
            if (!(x > 0.0)) fail("must be > 0, got " + detail::format_double(x));
    } else if (key == "span") {
        if (c.span && !(*c.span > 0.0)) fail("must be > 0, got " + detail::format_double(*c.span));
    } else if (key == "mode") {
        nonempty(c.modes.size());
    } else if (key == "distances") {
        if (c.experiment == Experiment::cov_vs_distance) nonempty(c.distances.size());
        for (double x : c.distances)
            if (!(x > 0.0)) fail("must be > 0, got " + detail::format_double(x));
    } else if (key == "t_max") {
        if (c.t_max < 1) fail("must be >= 1");
        if (c.experiment == Experiment::pmf)
            for (int n : c.N)
                if (c.t_max < n) fail("must be at least every N");
    } else if (key == "rel_tol") {
        if (!(c.rel_tol > 0.0 && c.rel_tol < 1.0)) fail("must lie in (0, 1)");
    } else if (key == "abs_tol") {
        if (!(c.abs_tol > 0.0)) fail("must be > 0");
    } else if (key == "trials") {
        if (c.trials < 2) fail("must be >= 2");
    } else if (key == "slot_cap") {
        if (c.slot_cap < 1) fail("must be >= 1");
    } else if (key == "pmf_term_budget") {
        if (c.pmf_term_budget < 1) fail("must be >= 1");
    } else if (key == "mass_tolerance") {
        if (!(c.mass_tolerance > 0.0)) fail("must be > 0");
    } else if (key == "threshold") {
        if (!(c.threshold > 0.0)) fail("must be > 0");
    }
}

std::string join(const std::vector<double>& xs) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + detail::format_double(xs[i]);
    return s + "]";
}

// Runs of three or more consecutive integers are written as a..b.
std::string join(const std::vector<int>& xs) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size();) {
        std::size_t j = i;
        while (j + 1 < xs.size() && xs[j + 1] == xs[j] + 1) ++j;
        if (i) s += ", ";
        if (j - i >= 2) {
            s += std::to_string(xs[i]) + ".." + std::to_string(xs[j]);
        } else {
            s += std::to_string(xs[i]);
            for (std::size_t k = i + 1; k <= j; ++k) s += ", " + std::to_string(xs[k]);
        }
        i = j + 1;
    }
    return s + "]";
}

std::vector<int> iota(int a, int b) {
    std::vector<int> v;
    for (int k = a; k <= b; ++k) v.push_back(k);
    return v;
}

}  // namespace

std::string_view to_string(Experiment e) {
    for (auto [k, name] : kExperimentNames)
        if (k == e) return name;
    return "?";
}

Experiment parse_experiment(std::string_view text) {
    for (auto [k, name] : kExperimentNames)
        if (name == text) return k;
    throw ConfigError("unknown experiment '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
    for (std::string_view key : kKeys) check_key(*this, key);
    if (span && !L.empty()) throw ConfigError("'L' and 'span' are mutually exclusive");
}

std::vector<double> ExperimentConfig::hop_lengths(int n) const {
    if (span) return {*span / n};
    return L;
}

ExperimentConfig default_config(Experiment e) {
    ExperimentConfig c;
    c.experiment = e;
    c.p = {1.0};
    c.theta = {0.1};
    c.alpha = {3.0};
    c.modes = {InterferenceMode::dependent, InterferenceMode::independent};
    switch (e) {
    case Experiment::mean_vs_N:
        c.lambda = {0.25, 0.75, 1.0, 2.0};
        c.N = iota(1, 20);
        c.span = 1.0;
        break;
    case Experiment::var_vs_N_fixed_span:
        c.lambda = {0.25, 0.75, 1.0};
        c.N = iota(1, 20);
        c.span = 1.0;
        break;
    case Experiment::var_vs_N_fixed_hop:
        c.lambda = {2.0};
        c.N = iota(1, 10);
        c.L = {0.1, 0.25, 0.5, 0.75, 1.0};
        break;
    case Experiment::cov_vs_distance:
        c.lambda = {0.5, 1.0, 1.5, 2.0};
        c.N = {2};
        c.L = {1.0};
        c.modes = {InterferenceMode::dependent};
        c.distances = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        break;
    case Experiment::speed_vs_L:
        c.lambda = {0.25};
        c.p = {0.25, 0.5, 0.75};
        c.theta = {0.2};
        c.N = {1};
        c.L = {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
        break;
    case Experiment::pmf:
        c.lambda = {0.5};
        c.p = {0.5};
        c.N = {1, 2};
        c.L = {1.0};
        break;
    case Experiment::validate:
        c.lambda = {0.25, 1.0};
        c.p = {0.5, 1.0};
        c.N = {3};
        c.span = 1.0;
        break;
    }
    return c;
}

ExperimentConfig parse_config(std::string_view text, std::optional<Experiment> fallback) {
    std::map<std::string, Value, std::less<>> values;
    int line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
        const std::string key(trim(line.substr(0, eq)));
        if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys))
            throw ConfigError("unknown key '" + key + "'", line_no);
        if (values.count(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
        values.emplace(key, parse_value(trim(line.substr(eq + 1)), line_no));
    }

    Experiment experiment;
    if (auto it = values.find("experiment"); it != values.end()) {
        try {
            experiment = parse_experiment(scalar(it->second, "experiment"));
        } catch (const ConfigError& e) {
            throw ConfigError(e.what(), it->second.line);
        }
    } else if (fallback) {
        experiment = *fallback;
    } else {
        throw ConfigError("missing required key 'experiment'");
    }

    ExperimentConfig c = default_config(experiment);
    if (values.count("L") && values.count("span"))
        throw ConfigError("'L' and 'span' are mutually exclusive", values.at("span").line);
    for (const auto& [key, v] : values) {
        if (key == "lambda") c.lambda = doubles(v, key);
        else if (key == "p") c.p = doubles(v, key);
        else if (key == "theta") c.theta = doubles(v, key);
        else if (key == "alpha") c.alpha = doubles(v, key);
        else if (key == "N") c.N = integers(v, key);
        else if (key == "L") c.L = doubles(v, key), c.span.reset();
        else if (key == "span") c.span = to_double(scalar(v, key), key, v.line), c.L.clear();
        else if (key == "mode") c.modes = modes(v);
        else if (key == "distances") c.distances = doubles(v, key);
        else if (key == "t_max") c.t_max = to_integer<int>(scalar(v, key), key, v.line);
        else if (key == "rel_tol") c.rel_tol = to_double(scalar(v, key), key, v.line);
        else if (key == "abs_tol") c.abs_tol = to_double(scalar(v, key), key, v.line);
        else if (key == "trials") c.trials = to_integer<std::size_t>(scalar(v, key), key, v.line);
        else if (key == "seed") c.seed = to_integer<std::uint64_t>(scalar(v, key), key, v.line);
        else if (key == "slot_cap") c.slot_cap = to_integer<std::int64_t>(scalar(v, key), key, v.line);
        else if (key == "pmf_term_budget") c.pmf_term_budget = to_integer<std::size_t>(scalar(v, key), key, v.line);
        else if (key == "mass_tolerance") c.mass_tolerance = to_double(scalar(v, key), key, v.line);
        else if (key == "threshold") c.threshold = to_double(scalar(v, key), key, v.line);
        else if (key == "path_loss") {
            const std::string_view s = scalar(v, key);
            if (s == "bounded") c.path_loss = PathLossModel::Kind::bounded;
            else if (s == "singular") c.path_loss = PathLossModel::Kind::singular;
            else throw ConfigError("'path_loss' expects bounded or singular, got '" + std::string(s) + "'", v.line);
        }
    }
    for (const auto& [key, v] : values) {
        try {
            check_key(c, key);
        } catch (const ConfigError& e) {
            throw ConfigError(e.what(), v.line);
        }
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Experiment> fallback) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), fallback);
}

std::string echo_config(const ExperimentConfig& c) {
    using detail::format_double;
    std::ostringstream o;
    o << "experiment = " << to_string(c.experiment) << '\n';
    o << "lambda = " << join(c.lambda) << '\n';
    o << "p = " << join(c.p) << '\n';
    o << "theta = " << join(c.theta) << '\n';
    o << "alpha = " << join(c.alpha) << '\n';
    o << "path_loss = " << (c.path_loss == PathLossModel::Kind::bounded ? "bounded" : "singular") << '\n';
    o << "N = " << join(c.N) << '\n';
    if (c.span)
        o << "span = " << format_double(*c.span) << '\n';
    else
        o << "L = " << join(c.L) << '\n';
    o << "mode = [";
    for (std::size_t i = 0; i < c.modes.size(); ++i) o << (i ? ", " : "") << to_string(c.modes[i]);
    o << "]\n";
    if (!c.distances.empty()) o << "distances = " << join(c.distances) << '\n';
    o << "t_max = " << c.t_max << '\n';
    o << "rel_tol = " << format_double(c.rel_tol) << '\n';
    o << "abs_tol = " << format_double(c.abs_tol) << '\n';
    o << "trials = " << c.trials << '\n';
    o << "seed = " << c.seed << '\n';
    o << "slot_cap = " << c.slot_cap << '\n';
    o << "pmf_term_budget = " << c.pmf_term_budget << '\n';
    o << "mass_tolerance = " << format_double(c.mass_tolerance) << '\n';
    o << "threshold = " << format_double(c.threshold) << '\n';
    return o.str();
}

ExperimentConfig config_from_csv_header(std::string_view csv) {
    std::string text;
    while (!csv.empty() && csv.front() == '#') {
        const auto nl = csv.find('\n');
        const std::string_view line = trim(csv.substr(1, nl == std::string_view::npos ? nl : nl - 1));
        if (line.find('=') != std::string_view::npos) text.append(line).push_back('\n');
        csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    }
    return parse_config(text);
}

}  // namespace relaychain
