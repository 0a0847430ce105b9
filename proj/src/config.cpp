#include "fockcool/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fockcool {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) {
        ++a;
    }
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) {
        --b;
    }
    return std::string(s.substr(a, b - a));
}

std::string error_text(const std::string &source, int line, const std::string &key,
                       const std::string &message) {
    std::ostringstream out;
    out << source;
    if (line > 0) {
        out << ":" << line;
    }
    if (!key.empty()) {
        out << ": " << key;
    }
    out << ": " << message;
    return out.str();
}

// Reads values for one key and reports errors against its line.
class Field {
  public:
    Field(const std::string &source, int line, const std::string &key,
          const std::string &value)
        : source_(source), line_(line), key_(key), value_(value) {}

    [[noreturn]] void fail(const std::string &message) const {
        throw ConfigError(source_, line_, key_, message);
    }

    double number(std::string_view text) const {
        const std::string t = trim(text);
        double v = 0.0;
        const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc() || end != t.data() + t.size() ||
            !std::isfinite(v)) {
            fail("expected a number, got '" + t + "'");
        }
        return v;
    }

    double number() const { return number(value_); }

    double positive() const {
        const double v = number();
        if (!(v > 0.0)) {
            fail("must be positive");
        }
        return v;
    }

    int integer(int min_value) const {
        const std::string t = trim(value_);
        int v = 0;
        const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc() || end != t.data() + t.size()) {
            fail("expected an integer, got '" + t + "'");
        }
        if (v < min_value) {
            fail("must be at least " + std::to_string(min_value));
        }
        return v;
    }

    /// Integer, or 0 for "auto".
    int integer_or_auto(int min_value) const {
        return trim(value_) == "auto" ? 0 : integer(min_value);
    }

    std::vector<double> number_list() const {
        const std::string t = trim(value_);
        if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
            fail("expected a list like [0.5, 0.5]");
        }
        std::vector<double> out;
        const std::string body = trim(std::string_view(t).substr(1, t.size() - 2));
        if (body.empty()) {
            return out;
        }
        std::stringstream in(body);
        std::string item;
        while (std::getline(in, item, ',')) {
            out.push_back(number(item));
        }
        return out;
    }

    std::vector<Pulse> pulse_list() const {
        const std::string t = trim(value_);
        if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
            fail("expected a list like [(-24, 0.6), (7, 0.2)]");
        }
        std::vector<Pulse> out;
        std::size_t pos = 1;
        const std::size_t end = t.size() - 1;
        while (true) {
            while (pos < end && (std::isspace(static_cast<unsigned char>(t[pos])) ||
                                 t[pos] == ',')) {
                ++pos;
            }
            if (pos >= end) {
                break;
            }
            if (t[pos] != '(') {
                fail("expected '(' at column " + std::to_string(pos + 1));
            }
            const std::size_t close = t.find(')', pos);
            if (close == std::string::npos || close > end) {
                fail("unterminated pulse starting at column " + std::to_string(pos + 1));
            }
            const std::string inner = t.substr(pos + 1, close - pos - 1);
            const std::size_t comma = inner.find(',');
            if (comma == std::string::npos) {
                fail("pulse needs (detuning, duration)");
            }
            Pulse p;
            p.delta = number(std::string_view(inner).substr(0, comma));
            p.duration = number(std::string_view(inner).substr(comma + 1));
            if (!(p.duration > 0.0)) {
                fail("pulse durations must be positive");
            }
            out.push_back(p);
            pos = close + 1;
        }
        if (out.empty()) {
            fail("pulse list is empty");
        }
        return out;
    }

    const std::string &text() const { return value_; }

  private:
    const std::string &source_;
    int line_;
    const std::string &key_;
    std::string value_;
};

} // namespace

ConfigError::ConfigError(const std::string &source, int line, const std::string &key,
                         const std::string &message)
    : std::runtime_error(error_text(source, line, key, message)), line_(line),
      key_(key) {}

PhysicalParams RunConfig::params() const {
    return PhysicalParams::make(eta, Gamma, gamma_ratio, Omega, angular);
}

PopulationVector RunConfig::initial_state() const {
    if (!populations.empty()) {
        return PopulationVector::from_values(populations);
    }
    return thermal_populations(nbar, thermal_support(nbar));
}

SchemeOptions RunConfig::scheme_options() const {
    SchemeOptions options;
    options.fig2_duration = fig2_duration;
    options.n_cycles = n_cycles;
    return options;
}

Cycle RunConfig::cycle() const {
    Cycle c;
    if (scheme || pulses.empty()) {
        c = build_cycle(scheme.value_or(SchemeId::fig3b), params(), scheme_options());
    } else {
        c.pulses = pulses;
    }
    c.n_cycles = n_cycles;
    return c;
}

SimulationOptions RunConfig::simulation_options() const {
    SimulationOptions options;
    options.n_max = n_max;
    options.rates.quad_order = quad_order;
    return options;
}

void RunConfig::validate(const std::string &source) const {
    auto fail = [&](const std::string &key, const std::string &message) {
        throw ConfigError(source, 0, key, message);
    };
    if (!std::isfinite(eta) || eta < 0.0) {
        fail("params.eta", "must be finite and non-negative");
    }
    if (!(Gamma > 0.0) || !std::isfinite(Gamma)) {
        fail("params.Gamma", "must be positive");
    }
    if (!(gamma_ratio > 0.0) || gamma_ratio > 1.0) {
        fail("params.gamma_ratio", "must lie in (0, 1]");
    }
    if (!(Omega > 0.0) || !std::isfinite(Omega)) {
        fail("params.Omega", "must be positive");
    }
    if (n_max < 0) {
        fail("basis.n_max", "must be non-negative");
    }
    if (!std::isfinite(nbar) || nbar < 0.0) {
        fail("initial.nbar", "must be non-negative");
    }
    if (!populations.empty()) {
        try {
            (void)PopulationVector::from_values(populations);
        } catch (const std::exception &e) {
            fail("initial.populations", e.what());
        }
        if (n_max > 0 && static_cast<int>(populations.size()) > n_max + 1) {
            fail("initial.populations", "longer than the basis");
        }
    }
    if (n_cycles < 0) {
        fail("cycle.n_cycles", "must be non-negative");
    }
    if (!(fig2_duration > 0.0)) {
        fail("cycle.fig2_duration", "must be positive");
    }
    if (quad_order != 0 && quad_order < 32) {
        fail("rates.quad_order", "must be at least 32");
    }
    if (budget < 1) {
        fail("optimize.budget", "must be at least 1");
    }
}

RunConfig parse_config(const std::string &text, const std::string &source,
                       RunConfig base) {
    RunConfig config = std::move(base);
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source, line_no, "", "expected 'key = value'");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const Field f(source, line_no, key, trim(std::string_view(line).substr(eq + 1)));
        if (key.empty()) {
            f.fail("missing key");
        }
        if (f.text().empty()) {
            f.fail("missing value");
        }
        if (!seen.insert(key).second) {
            f.fail("duplicate key");
        }

        if (key == "params.eta") {
            config.eta = f.number();
            if (config.eta < 0.0) {
                f.fail("must be non-negative");
            }
        } else if (key == "params.Gamma") {
            config.Gamma = f.positive();
        } else if (key == "params.gamma_ratio") {
            config.gamma_ratio = f.positive();
        } else if (key == "params.Omega") {
            config.Omega = f.positive();
        } else if (key == "params.angular") {
            try {
                config.angular = parse_angular_kind(f.text());
            } catch (const std::exception &e) {
                f.fail(e.what());
            }
        } else if (key == "basis.n_max") {
            config.n_max = f.integer_or_auto(1);
        } else if (key == "initial.nbar") {
            config.nbar = f.number();
            if (config.nbar < 0.0) {
                f.fail("must be non-negative");
            }
            config.populations.clear();
        } else if (key == "initial.populations") {
            config.populations = f.number_list();
            if (config.populations.empty()) {
                f.fail("population list is empty");
            }
            try {
                (void)PopulationVector::from_values(config.populations);
            } catch (const std::exception &e) {
                f.fail(e.what());
            }
        } else if (key == "cycle.scheme") {
            try {
                config.scheme = parse_scheme(f.text());
            } catch (const std::exception &e) {
                f.fail(e.what());
            }
            config.pulses.clear();
        } else if (key == "cycle.pulses") {
            config.pulses = f.pulse_list();
            config.scheme.reset();
        } else if (key == "cycle.n_cycles") {
            config.n_cycles = f.integer(0);
        } else if (key == "cycle.fig2_duration") {
            config.fig2_duration = f.positive();
        } else if (key == "rates.quad_order") {
            config.quad_order = f.integer_or_auto(32);
        } else if (key == "output.dir") {
            config.out_dir = f.text();
        } else if (key == "optimize.budget") {
            config.budget = f.integer(1);
        } else {
            f.fail("unknown key");
        }
    }
    if (seen.contains("cycle.scheme") && seen.contains("cycle.pulses")) {
        throw ConfigError(source, 0, "cycle.pulses",
                          "give either cycle.scheme or cycle.pulses, not both");
    }
    if (seen.contains("initial.nbar") && seen.contains("initial.populations")) {
        throw ConfigError(source, 0, "initial.populations",
                          "give either initial.nbar or initial.populations, not both");
    }
    config.validate(source);
    return config;
}

RunConfig load_config(const std::string &path, RunConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path, 0, "", "cannot open file");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path, std::move(base));
}

std::string format_exact(double value) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ec == std::errc() ? end : buf);
}

std::string to_config_text(const RunConfig &config) {
    std::ostringstream out;
    out << "params.eta = " << format_exact(config.eta) << "\n"
        << "params.Gamma = " << format_exact(config.Gamma) << "\n"
        << "params.gamma_ratio = " << format_exact(config.gamma_ratio) << "\n"
        << "params.Omega = " << format_exact(config.Omega) << "\n"
        << "params.angular = " << to_string(config.angular) << "\n"
        << "basis.n_max = "
        << (config.n_max > 0 ? std::to_string(config.n_max) : std::string("auto"))
        << "\n";
    if (config.populations.empty()) {
        out << "initial.nbar = " << format_exact(config.nbar) << "\n";
    } else {
        out << "initial.populations = [";
        for (std::size_t i = 0; i < config.populations.size(); ++i) {
            out << (i ? ", " : "") << format_exact(config.populations[i]);
        }
        out << "]\n";
    }
    if (config.scheme) {
        out << "cycle.scheme = " << to_string(*config.scheme) << "\n";
    } else {
        out << "cycle.pulses = [";
        for (std::size_t i = 0; i < config.pulses.size(); ++i) {
            out << (i ? ", " : "") << "(" << format_exact(config.pulses[i].delta) << ", "
                << format_exact(config.pulses[i].duration) << ")";
        }
        out << "]\n";
    }
    out << "cycle.n_cycles = " << config.n_cycles << "\n"
        << "cycle.fig2_duration = " << format_exact(config.fig2_duration) << "\n"
        << "rates.quad_order = "
        << (config.quad_order > 0 ? std::to_string(config.quad_order)
                                  : std::string("auto"))
        << "\n";
    return out.str();
}

} // namespace fockcool
