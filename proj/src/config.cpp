#include "impulsemc/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace imc {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": not a number: " + value);
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw std::invalid_argument(key + ": not a nonnegative integer: " + value);
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    const std::uint64_t v = parse_u64(key, value);
    if (v > 1000000) throw std::invalid_argument(key + ": unreasonably large: " + value);
    return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw std::invalid_argument(key + ": not a boolean: " + value);
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    if (out.empty()) throw std::invalid_argument(key + ": empty list");
    return out;
}

void set_key(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "mu0") c.params.mu0 = parse_double(key, value);
    else if (key == "mus") c.params.mus = parse_list(key, value);
    else if (key == "probs") c.params.probs = parse_list(key, value);
    else if (key == "lambda") c.params.lambda = parse_double(key, value);
    else if (key == "sigma") c.params.sigma = parse_double(key, value);
    else if (key == "x0") c.params.x0 = parse_double(key, value);
    else if (key == "horizon") c.params.horizon = parse_double(key, value);
    else if (key == "n_steps") c.n_steps = parse_int(key, value);
    else if (key == "m_paths") c.m_paths = parse_u64(key, value);
    else if (key == "m_new") c.m_new = parse_u64(key, value);
    else if (key == "m_arbitrary") c.m_arbitrary = parse_u64(key, value);
    else if (key == "q") c.q = parse_double(key, value);
    else if (key == "seed") c.seed = parse_u64(key, value);
    else if (key == "output_dir") c.output_dir = value;
    else if (key == "itm_filter") c.itm_filter = parse_bool(key, value);
    else if (key == "fitted_v1") c.fitted_v1 = parse_bool(key, value);
    else if (key == "substeps") c.substeps = parse_int(key, value);
    else if (key == "threads") c.threads = static_cast<unsigned>(parse_int(key, value));
    else if (key == "kernel") c.kernel = kernels::parse_backend(value);
    else if (key == "basis") c.basis = parse_basis(value);
    else if (key == "rewards") {
        if (value != "gbm_trading")
            throw std::invalid_argument("rewards: unknown preset: " + value);
        c.rewards = value;
    } else {
        throw std::invalid_argument("unknown config key: " + key);
    }
}

}  // namespace

void RunConfig::validate() const {
    params.validate();
    grid().validate();
    if (n_steps < 2) throw std::invalid_argument("n_steps: must be at least 2");
    if (m_paths == 0) throw std::invalid_argument("m_paths: must be at least 1");
    if (m_new == 0) throw std::invalid_argument("m_new: must be at least 1");
    if (m_arbitrary == 0) throw std::invalid_argument("m_arbitrary: must be at least 1");
    if (substeps < 1) throw std::invalid_argument("substeps: must be at least 1");
    if (!(q > 0.0)) throw std::invalid_argument("q: must be strictly positive");
    if (output_dir.empty()) throw std::invalid_argument("output_dir: must not be empty");
}

RunConfig load_config(const std::string& path) {
    RunConfig config;
    if (path.empty()) return config;
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        ": expected key=value");
        set_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return config;
}

void apply_override(RunConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("--set: expected KEY=VALUE, got: " + assignment);
    set_key(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string dump_config(const RunConfig& c) {
    std::ostringstream out;
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    auto list = [&](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ',';
            s += num(v[i]);
        }
        return s;
    };
    out << "mu0 = " << num(c.params.mu0) << '\n'
        << "mus = " << list(c.params.mus) << '\n'
        << "probs = " << list(c.params.probs) << '\n'
        << "lambda = " << num(c.params.lambda) << '\n'
        << "sigma = " << num(c.params.sigma) << '\n'
        << "x0 = " << num(c.params.x0) << '\n'
        << "horizon = " << num(c.params.horizon) << '\n'
        << "n_steps = " << c.n_steps << '\n'
        << "m_paths = " << c.m_paths << '\n'
        << "m_new = " << c.m_new << '\n'
        << "m_arbitrary = " << c.m_arbitrary << '\n'
        << "q = " << num(c.q) << '\n'
        << "seed = " << c.seed << '\n'
        << "output_dir = " << c.output_dir << '\n'
        << "itm_filter = " << (c.itm_filter ? "true" : "false") << '\n'
        << "fitted_v1 = " << (c.fitted_v1 ? "true" : "false") << '\n'
        << "substeps = " << c.substeps << '\n'
        << "threads = " << c.threads << '\n'
        << "kernel = "
        << (c.kernel == kernels::Backend::kAuto
                ? "auto"
                : c.kernel == kernels::Backend::kScalar ? "scalar" : "avx2")
        << '\n'
        << "basis = " << basis_name(c.basis) << '\n'
        << "rewards = " << c.rewards << '\n';
    return out.str();
}

}  // namespace imc
