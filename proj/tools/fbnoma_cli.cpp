// Command-line front end: single-instance solves, sweeps and Monte-Carlo
// experiments, emitted as JSON or plot-ready CSV.  All numeric output is
// printed with 12 significant digits; a JSON result's "config" object can
// be fed back via --config to reproduce the run (flags override the file).

#include "fbnoma/approx.hpp"
#include "fbnoma/channel.hpp"
#include "fbnoma/fbc.hpp"
#include "fbnoma/hybrid.hpp"
#include "fbnoma/montecarlo.hpp"
#include "fbnoma/noma.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::ordered_json;
using namespace fbnoma;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------- io

std::string fmt12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

double round12(double x) {
    if (!std::isfinite(x)) return x;
    return std::strtod(fmt12(x).c_str(), nullptr);
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + out_path);
    f << text;
}

// ------------------------------------------------------------------ parsing

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Power values carry an explicit unit suffix: "40dBm" or "10W".
double parse_power_w(const std::string& raw) {
    std::string s = trim(raw);
    std::string l = lower(s);
    double v;
    size_t unit;
    if (l.size() >= 3 && l.substr(l.size() - 3) == "dbm") {
        unit = l.size() - 3;
        v = std::strtod(s.substr(0, unit).c_str(), nullptr);
        return std::pow(10.0, (v - 30.0) / 10.0);
    }
    if (!l.empty() && l.back() == 'w') {
        unit = l.size() - 1;
        char* end = nullptr;
        v = std::strtod(s.substr(0, unit).c_str(), &end);
        return v;
    }
    throw ConfigError("power value needs a dBm or W suffix: '" + raw + "'");
}

double parse_double(const std::string& s, const std::string& key) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw ConfigError("bad numeric value for " + key + ": '" + s + "'");
    return v;
}

long long parse_int(const std::string& s, const std::string& key) {
    double v = parse_double(s, key);
    auto n = static_cast<long long>(std::llround(v));
    if (v != static_cast<double>(n))
        throw ConfigError("expected an integer for " + key + ": '" + s + "'");
    return n;
}

bool parse_bool(const std::string& s, const std::string& key) {
    std::string l = lower(trim(s));
    if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
    if (l == "false" || l == "0" || l == "no" || l == "off") return false;
    throw ConfigError("expected a boolean for " + key + ": '" + s + "'");
}

// "a,b,c" or "lo:hi:step"
std::vector<double> parse_values(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double lo, hi, step;
        char c1, c2;
        std::istringstream is(spec);
        if (!(is >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' ||
            !(step > 0.0))
            throw ConfigError("bad range spec (want lo:hi:step): '" + spec + "'");
        for (double v = lo; v <= hi + 1e-9 * step; v += step) out.push_back(v);
        return out;
    }
    std::istringstream is(spec);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(parse_double(tok, "values"));
    }
    if (out.empty()) throw ConfigError("empty value list: '" + spec + "'");
    return out;
}

std::vector<sim::SchemeId> parse_schemes(const std::string& spec) {
    std::vector<sim::SchemeId> out;
    std::istringstream is(spec);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        auto id = sim::scheme_id_from(lower(tok));
        if (!id) throw ConfigError("unknown scheme: '" + tok + "'");
        out.push_back(*id);
    }
    if (out.empty()) throw ConfigError("empty scheme list");
    return out;
}

// ----------------------------------------------------------- config files

using Kv = std::map<std::string, std::string>;

void flatten_json_config(const ordered_json& j, Kv& kv) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& v = it.value();
        if (v.is_string())
            kv[it.key()] = v.get<std::string>();
        else if (v.is_boolean())
            kv[it.key()] = v.get<bool>() ? "true" : "false";
        else if (v.is_number_integer())
            kv[it.key()] = std::to_string(v.get<long long>());
        else if (v.is_number())
            kv[it.key()] = fmt12(v.get<double>());
        else if (v.is_array()) {
            std::string joined;
            for (const auto& e : v) {
                if (!joined.empty()) joined += ",";
                joined += e.is_string() ? e.get<std::string>() : fmt12(e.get<double>());
            }
            kv[it.key()] = joined;
        }
    }
}

// Either a key=value file with optional [sections], or a JSON document
// (a previous result; its "config" object is used).
Kv load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
    Kv kv;
    size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        ordered_json j = ordered_json::parse(text);
        if (j.contains("config") && j["config"].is_object())
            flatten_json_config(j["config"], kv);
        else
            flatten_json_config(j, kv);
        return kv;
    }
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("bad config line (want key = value): '" + line + "'");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

// ------------------------------------------------------- option resolution

// Flags are collected as strings; the effective value of a key is the flag
// when given, else the config-file entry, else the default.  The same name
// may be registered on several subcommands; only the parsed one can have a
// nonzero count.
struct OptBag {
    std::map<std::string, std::string> raw;
    std::map<std::string, std::vector<CLI::Option*>> opts;
    Kv file;

    void add(CLI::App* cmd, const std::string& name, const std::string& desc) {
        opts[name].push_back(cmd->add_option("--" + name, raw[name], desc));
    }
    std::optional<std::string> lookup(const std::string& name) const {
        auto it = opts.find(name);
        if (it != opts.end())
            for (const auto* o : it->second)
                if (o->count() > 0) return raw.at(name);
        auto f = file.find(name);
        if (f != file.end()) return f->second;
        return std::nullopt;
    }
    std::string str(const std::string& name, const std::string& def) const {
        auto v = lookup(name);
        return v ? *v : def;
    }
    std::string required_str(const std::string& name) const {
        auto v = lookup(name);
        if (!v) throw ConfigError("missing required option --" + name);
        return *v;
    }
    double num(const std::string& name, double def) const {
        auto v = lookup(name);
        return v ? parse_double(*v, name) : def;
    }
    double required_num(const std::string& name) const {
        return parse_double(required_str(name), name);
    }
    long long integer(const std::string& name, long long def) const {
        auto v = lookup(name);
        return v ? parse_int(*v, name) : def;
    }
    long long required_int(const std::string& name) const {
        return parse_int(required_str(name), name);
    }
    double power_w(const std::string& name, const std::string& def) const {
        return parse_power_w(str(name, def));
    }
    double required_power_w(const std::string& name) const {
        return parse_power_w(required_str(name));
    }
    bool boolean(const std::string& name, bool def) const {
        auto v = lookup(name);
        return v ? parse_bool(*v, name) : def;
    }
};

void add_scenario_options(CLI::App* cmd, OptBag& bag) {
    bag.add(cmd, "n1", "user-1 information bits");
    bag.add(cmd, "n2", "user-2 information bits");
    bag.add(cmd, "d1", "user-1 deadline, symbols");
    bag.add(cmd, "d2", "user-2 deadline, symbols");
    bag.add(cmd, "eps1", "user-1 block error probability");
    bag.add(cmd, "eps2", "user-2 block error probability");
    bag.add(cmd, "h1", "user-1 normalized channel gain, linear");
    bag.add(cmd, "h2", "user-2 normalized channel gain, linear");
    bag.add(cmd, "pmax", "transmit power budget, e.g. 40dBm or 10W");
    bag.add(cmd, "min-blocklength", "validity floor of the rate model (default 100)");
    bag.add(cmd, "sinr-tol", "bisection tolerance on SINR brackets (default 1e-9)");
}

void add_hybrid_options(CLI::App* cmd, OptBag& bag) {
    bag.add(cmd, "eps21", "error target of the superposed part (default 5e-7)");
    bag.add(cmd, "eps22", "error target of the clean slot (default 5e-7)");
}

void add_channel_options(CLI::App* cmd, OptBag& bag) {
    bag.add(cmd, "distance", "transmitter-receiver distance, meters (default 10)");
    bag.add(cmd, "alpha", "path loss exponent (default 2)");
    bag.add(cmd, "pathloss-scale", "path loss scale factor (default 1e-3)");
    bag.add(cmd, "noise", "noise power, e.g. -110dBm");
    bag.add(cmd, "fading-variance", "Rayleigh |fade|^2 mean; 0 disables fading");
    bag.add(cmd, "polar-loss", "apply the 0.25 dB coding-loss multiplier (true/false)");
}

void add_io_options(CLI::App* cmd, OptBag& bag) {
    bag.add(cmd, "config", "key=value file or a previous JSON result");
    bag.add(cmd, "out", "output path (default stdout)");
    bag.add(cmd, "format", "json or csv");
}

noma::ScenarioParams scenario_from(const OptBag& bag) {
    noma::ScenarioParams sp;
    sp.user1 = {static_cast<int>(bag.required_int("n1")),
                static_cast<int>(bag.required_int("d1")), bag.required_num("eps1"),
                bag.required_num("h1")};
    sp.user2 = {static_cast<int>(bag.required_int("n2")),
                static_cast<int>(bag.required_int("d2")), bag.required_num("eps2"),
                bag.required_num("h2")};
    sp.p_max = bag.required_power_w("pmax");
    sp.min_blocklength = static_cast<int>(bag.integer("min-blocklength", 100));
    sp.sinr_tol = bag.num("sinr-tol", 1e-9);
    return sp;
}

ordered_json scenario_config_json(const noma::ScenarioParams& sp) {
    ordered_json j;
    j["n1"] = sp.user1.bits;
    j["d1"] = sp.user1.deadline;
    j["eps1"] = round12(sp.user1.error_prob);
    j["h1"] = round12(sp.user1.gain);
    j["n2"] = sp.user2.bits;
    j["d2"] = sp.user2.deadline;
    j["eps2"] = round12(sp.user2.error_prob);
    j["h2"] = round12(sp.user2.gain);
    j["pmax"] = fmt12(sp.p_max) + "W";
    j["min-blocklength"] = sp.min_blocklength;
    j["sinr-tol"] = round12(sp.sinr_tol);
    return j;
}

// ------------------------------------------------------------ certificates

double residual_of(int bits, double eps, int mhat, double m, double sinr) {
    fbc::FbcParams p(bits, eps, mhat);
    return fbc::fbc_residual(m, sinr, p);
}

// --------------------------------------------------------------- commands

int emit_solve_result(const ordered_json& j, const OptBag& bag, bool feasible) {
    write_output(j.dump(2) + "\n", bag.str("out", ""));
    return feasible ? 0 : 3;
}

int cmd_solve_noma(const OptBag& bag) {
    auto sp = scenario_from(bag);
    ordered_json j;
    j["command"] = "solve-noma";
    j["config"] = scenario_config_json(sp);

    auto res = noma::solve_noma(sp);
    if (sp.user1.gain > sp.user2.gain) {
        ordered_json branches;
        for (auto [name, r] : {std::pair{"case2-full-block", noma::solve_case2_full(sp)},
                               std::pair{"case2-short-block", noma::solve_case2_sic(sp)}}) {
            ordered_json b;
            b["status"] = r.feasible() ? "feasible" : "infeasible";
            if (r.feasible())
                b["energy-watt-symbols"] = round12(r.value().energy);
            else
                b["reason"] = std::string(noma::reason_name(r.reason));
            branches[name] = b;
        }
        j["branches"] = branches;
    }

    j["status"] = res.feasible() ? "feasible" : "infeasible";
    if (!res.feasible()) {
        j["reason"] = std::string(noma::reason_name(res.reason));
        return emit_solve_result(j, bag, false);
    }
    const auto& a = res.value();
    j["scheme"] = std::string(noma::scheme_name(a.scheme));
    ordered_json alloc;
    alloc["m1"] = a.m1;
    alloc["m2"] = a.m2;
    alloc["sinr1"] = round12(a.sinr1);
    alloc["sinr2"] = round12(a.sinr2);
    alloc["p1-w"] = round12(a.p1);
    alloc["p2-w"] = round12(a.p2);
    j["allocation"] = alloc;
    j["energy-watt-symbols"] = round12(a.energy);
    ordered_json cert;
    cert["residual1"] = round12(
        residual_of(sp.user1.bits, sp.user1.error_prob, sp.min_blocklength, a.m1, a.sinr1));
    cert["residual2"] = round12(
        residual_of(sp.user2.bits, sp.user2.error_prob, sp.min_blocklength, a.m2, a.sinr2));
    cert["power-slack-w"] = round12(sp.p_max - a.p1 - a.p2);
    cert["composed-error"] =
        round12(noma::compose_error(sp.user1.error_prob, sp.user2.error_prob));
    j["certificates"] = cert;
    return emit_solve_result(j, bag, true);
}

int cmd_solve_tdma(const OptBag& bag) {
    auto sp = scenario_from(bag);
    ordered_json j;
    j["command"] = "solve-tdma";
    j["config"] = scenario_config_json(sp);
    auto res = hybrid::tdma_solver(sp);
    j["status"] = res.feasible() ? "feasible" : "infeasible";
    if (!res.feasible()) {
        j["reason"] = std::string(noma::reason_name(res.reason));
        return emit_solve_result(j, bag, false);
    }
    const auto& a = res.value();
    ordered_json alloc;
    alloc["m1"] = a.m1;
    alloc["m2"] = a.m2;
    alloc["sinr1"] = round12(a.sinr1);
    alloc["sinr2"] = round12(a.sinr2);
    alloc["p1-w"] = round12(a.p1);
    alloc["p2-w"] = round12(a.p2);
    j["allocation"] = alloc;
    j["energy-watt-symbols"] = round12(a.energy);
    ordered_json cert;
    cert["residual1"] = round12(
        residual_of(sp.user1.bits, sp.user1.error_prob, sp.min_blocklength, a.m1, a.sinr1));
    cert["residual2"] = round12(
        residual_of(sp.user2.bits, sp.user2.error_prob, sp.min_blocklength, a.m2, a.sinr2));
    j["certificates"] = cert;
    return emit_solve_result(j, bag, true);
}

int cmd_solve_hybrid(const OptBag& bag) {
    hybrid::HybridParams hp;
    hp.base = scenario_from(bag);
    hp.eps21 = bag.num("eps21", 5e-7);
    hp.eps22 = bag.num("eps22", 5e-7);
    std::string method = lower(bag.str("method", "golden"));

    ordered_json j;
    j["command"] = "solve-hybrid";
    ordered_json cfg = scenario_config_json(hp.base);
    cfg["eps21"] = round12(hp.eps21);
    cfg["eps22"] = round12(hp.eps22);
    cfg["method"] = method;
    j["config"] = cfg;

    noma::SolveResult<hybrid::HybridAllocation> res;
    if (method == "golden") {
        res = hybrid::solve_hybrid(hp);
    } else if (method == "exhaustive") {
        res = hp.base.user1.gain <= hp.base.user2.gain
                  ? hybrid::solve_hybrid_exhaustive(hp)
                  : hybrid::solve_hybrid_case2_exhaustive(hp);
    } else {
        throw ConfigError("unknown --method (want golden or exhaustive)");
    }

    j["status"] = res.feasible() ? "feasible" : "infeasible";
    if (!res.feasible()) {
        j["reason"] = std::string(noma::reason_name(res.reason));
        return emit_solve_result(j, bag, false);
    }
    const auto& a = res.value();
    j["case"] = a.case_tag;
    j["mode"] = a.mode == hybrid::HybridMode::split ? "split" : "pure-noma";
    if (a.mode == hybrid::HybridMode::pure_noma)
        j["noma-scheme"] = std::string(noma::scheme_name(a.noma_scheme));
    ordered_json alloc;
    alloc["n21"] = a.n21;
    alloc["n22"] = a.n22;
    alloc["m1"] = a.m1;
    alloc["m21"] = a.m21;
    alloc["m22"] = a.m22;
    alloc["sinr1"] = round12(a.sinr1);
    alloc["sinr21"] = round12(a.sinr21);
    alloc["sinr22"] = round12(a.sinr22);
    alloc["p1-w"] = round12(a.p1);
    alloc["p21-w"] = round12(a.p21);
    alloc["p22-w"] = round12(a.p22);
    j["allocation"] = alloc;
    j["energy-watt-symbols"] = round12(a.energy);

    ordered_json cert;
    const auto& b = hp.base;
    cert["residual1"] = round12(
        residual_of(b.user1.bits, b.user1.error_prob, b.min_blocklength, a.m1, a.sinr1));
    if (a.mode == hybrid::HybridMode::split) {
        if (a.n21 > 0)
            cert["residual21"] =
                round12(residual_of(a.n21, hp.eps21, b.min_blocklength, a.m21, a.sinr21));
        if (a.n22 > 0)
            cert["residual22"] =
                round12(residual_of(a.n22, hp.eps22, b.min_blocklength, a.m22, a.sinr22));
        cert["composed-error"] = round12(noma::compose_error(
            b.user1.error_prob, noma::compose_error(hp.eps21, hp.eps22)));
    }
    cert["power-slack-phase1-w"] = round12(b.p_max - a.p1 - a.p21);
    cert["power-slack-slot2-w"] = round12(b.p_max - a.p22);
    j["certificates"] = cert;
    return emit_solve_result(j, bag, true);
}

int cmd_min_latency(const OptBag& bag) {
    auto sp = scenario_from(bag);
    int cap = static_cast<int>(bag.integer("m2-cap", 1000000));
    ordered_json j;
    j["command"] = "min-latency";
    ordered_json cfg = scenario_config_json(sp);
    cfg["m2-cap"] = cap;
    j["config"] = cfg;

    auto res = noma::minimize_latency(sp, cap);
    j["status"] = res.feasible() ? "feasible" : "infeasible";
    if (!res.feasible()) {
        j["reason"] = std::string(noma::reason_name(res.reason));
        return emit_solve_result(j, bag, false);
    }
    const auto& a = res.value();
    j["m2"] = a.m2;
    ordered_json alloc;
    alloc["m1"] = a.m1;
    alloc["m2"] = a.m2;
    alloc["sinr1"] = round12(a.sinr1);
    alloc["sinr2"] = round12(a.sinr2);
    alloc["p1-w"] = round12(a.p1);
    alloc["p2-w"] = round12(a.p2);
    j["allocation"] = alloc;
    j["energy-watt-symbols"] = round12(a.energy);
    ordered_json cert;
    cert["power-slack-w"] = round12(sp.p_max - a.p1 - a.p2);
    cert["m2-minus-1-feasible"] =
        a.m2 > sp.min_blocklength &&
        noma::minimize_latency(sp, a.m2 - 1).feasible();
    j["certificates"] = cert;
    return emit_solve_result(j, bag, true);
}

int cmd_feasibility(const OptBag& bag) {
    auto sp = scenario_from(bag);
    std::string scheme = lower(bag.str("scheme", "noma"));
    ordered_json j;
    j["command"] = "feasibility";
    ordered_json cfg = scenario_config_json(sp);
    cfg["scheme"] = scheme;
    j["config"] = cfg;

    bool feasible;
    noma::InfeasibleReason reason = noma::InfeasibleReason::power_budget;
    if (scheme == "noma") {
        auto r = noma::solve_noma(sp);
        feasible = r.feasible();
        reason = r.reason;
    } else if (scheme == "tdma") {
        auto r = hybrid::tdma_solver(sp);
        feasible = r.feasible();
        reason = r.reason;
    } else if (scheme == "hybrid") {
        hybrid::HybridParams hp;
        hp.base = sp;
        hp.eps21 = bag.num("eps21", 5e-7);
        hp.eps22 = bag.num("eps22", 5e-7);
        auto r = hybrid::solve_hybrid(hp);
        feasible = r.feasible();
        reason = r.reason;
    } else {
        throw ConfigError("unknown --scheme (want noma, tdma or hybrid)");
    }

    j["feasible"] = feasible;
    if (!feasible) j["reason"] = std::string(noma::reason_name(reason));
    return emit_solve_result(j, bag, feasible);
}

// Sweep / Monte-Carlo config shared assembly.
sim::ExperimentConfig experiment_from(const OptBag& bag, bool needs_realizations) {
    sim::ExperimentConfig cfg;
    std::string axis = lower(bag.str("axis", "d1"));
    if (axis == "d1")
        cfg.axis = sim::SweepAxis::d1;
    else if (axis == "pmax-dbm" || axis == "pmax")
        cfg.axis = sim::SweepAxis::pmax_dbm;
    else if (axis == "packets")
        cfg.axis = sim::SweepAxis::packets;
    else
        throw ConfigError("unknown --axis (want d1, pmax-dbm or packets)");
    cfg.values = parse_values(bag.required_str("values"));
    cfg.schemes = parse_schemes(bag.str("schemes", "noma,tdma"));
    cfg.realizations = static_cast<std::uint64_t>(
        bag.integer("realizations", needs_realizations ? 1000 : 0));
    cfg.seed = static_cast<std::uint64_t>(bag.integer("seed", 1));
    std::string cond = lower(bag.str("condition", "all"));
    if (cond == "all")
        cfg.condition = sim::Condition::all;
    else if (cond == "h1-less")
        cfg.condition = sim::Condition::h1_less;
    else if (cond == "h1-geq")
        cfg.condition = sim::Condition::h1_geq;
    else
        throw ConfigError("unknown --condition (want all, h1-less or h1-geq)");

    cfg.n1 = static_cast<int>(bag.integer("n1", 256));
    cfg.n2 = static_cast<int>(bag.integer("n2", 256));
    cfg.d1 = static_cast<int>(bag.integer("d1", 640));
    cfg.d2 = static_cast<int>(bag.integer("d2", 640));
    cfg.eps1 = bag.num("eps1", 1e-6);
    cfg.eps2 = bag.num("eps2", 1e-6);
    cfg.eps21 = bag.num("eps21", 5e-7);
    cfg.eps22 = bag.num("eps22", 5e-7);
    cfg.p_max_w = bag.power_w("pmax", "40dBm");
    cfg.min_blocklength = static_cast<int>(bag.integer("min-blocklength", 100));
    cfg.channel.distance = bag.num("distance", 10.0);
    cfg.channel.pathloss_exp = bag.num("alpha", 2.0);
    cfg.channel.pathloss_scale = bag.num("pathloss-scale", 1e-3);
    cfg.channel.noise_w = bag.power_w("noise", "-110dBm");
    cfg.channel.fading_variance = bag.num("fading-variance", 1.0);
    cfg.polar_loss = bag.boolean("polar-loss", false);
    return cfg;
}

ordered_json experiment_config_json(const sim::ExperimentConfig& cfg,
                                    const char* command) {
    ordered_json j;
    j["command"] = command;
    switch (cfg.axis) {
        case sim::SweepAxis::d1: j["axis"] = "d1"; break;
        case sim::SweepAxis::pmax_dbm: j["axis"] = "pmax-dbm"; break;
        case sim::SweepAxis::packets: j["axis"] = "packets"; break;
    }
    std::string vals;
    for (double v : cfg.values) {
        if (!vals.empty()) vals += ",";
        vals += fmt12(v);
    }
    j["values"] = vals;
    std::string schemes;
    for (auto s : cfg.schemes) {
        if (!schemes.empty()) schemes += ",";
        schemes += std::string(sim::scheme_id_name(s));
    }
    j["schemes"] = schemes;
    j["realizations"] = cfg.realizations;
    j["seed"] = cfg.seed;
    switch (cfg.condition) {
        case sim::Condition::all: j["condition"] = "all"; break;
        case sim::Condition::h1_less: j["condition"] = "h1-less"; break;
        case sim::Condition::h1_geq: j["condition"] = "h1-geq"; break;
    }
    j["n1"] = cfg.n1;
    j["n2"] = cfg.n2;
    j["d1"] = cfg.d1;
    j["d2"] = cfg.d2;
    j["eps1"] = round12(cfg.eps1);
    j["eps2"] = round12(cfg.eps2);
    j["eps21"] = round12(cfg.eps21);
    j["eps22"] = round12(cfg.eps22);
    j["pmax"] = fmt12(cfg.p_max_w) + "W";
    j["min-blocklength"] = cfg.min_blocklength;
    j["distance"] = round12(cfg.channel.distance);
    j["alpha"] = round12(cfg.channel.pathloss_exp);
    j["pathloss-scale"] = round12(cfg.channel.pathloss_scale);
    j["noise"] = fmt12(cfg.channel.noise_w) + "W";
    j["fading-variance"] = round12(cfg.channel.fading_variance);
    j["polar-loss"] = cfg.polar_loss;
    return j;
}

// Fixed-channel sweep row: direct solver calls at the given gains.
void fixed_sweep_row(const sim::ExperimentConfig& cfg, double value,
                     sim::SchemeId scheme, double h1, double h2, double sinr_tol,
                     bool& feasible, double& energy) {
    noma::ScenarioParams sp;
    sp.user1 = {cfg.n1, cfg.d1, cfg.eps1, h1};
    sp.user2 = {cfg.n2, cfg.d2, cfg.eps2, h2};
    sp.p_max = cfg.p_max_w;
    sp.min_blocklength = cfg.min_blocklength;
    sp.sinr_tol = sinr_tol;
    switch (cfg.axis) {
        case sim::SweepAxis::d1: sp.user1.deadline = static_cast<int>(value); break;
        case sim::SweepAxis::pmax_dbm:
            sp.p_max = std::pow(10.0, (value - 30.0) / 10.0);
            break;
        case sim::SweepAxis::packets: {
            int k = static_cast<int>(value);
            if (k < 1 || k != value)
                throw ConfigError("packets axis needs integer values >= 1");
            sp.user1.bits = cfg.n1 * k;
            sp.user2.bits = cfg.n2 * k;
            break;
        }
    }
    feasible = false;
    energy = std::numeric_limits<double>::quiet_NaN();
    auto take = [&](bool ok, double e) {
        feasible = ok;
        if (ok) energy = e;
    };
    switch (scheme) {
        case sim::SchemeId::noma: {
            auto r = noma::solve_noma(sp);
            take(r.feasible(), r.feasible() ? r.value().energy : 0.0);
            break;
        }
        case sim::SchemeId::tdma: {
            auto r = hybrid::tdma_solver(sp);
            take(r.feasible(), r.feasible() ? r.value().energy : 0.0);
            break;
        }
        case sim::SchemeId::hybrid: {
            hybrid::HybridParams hp;
            hp.base = sp;
            hp.eps21 = cfg.eps21;
            hp.eps22 = cfg.eps22;
            auto r = hybrid::solve_hybrid(hp);
            take(r.feasible(), r.feasible() ? r.value().energy : 0.0);
            break;
        }
        case sim::SchemeId::shannon_noma: {
            auto r = sim::shannon_baseline(sp);
            take(r.feasible(), r.feasible() ? r.value().energy : 0.0);
            break;
        }
    }
    if (feasible && cfg.polar_loss) energy *= std::pow(10.0, 0.025);
}

int cmd_sweep(const OptBag& bag) {
    sim::ExperimentConfig cfg = experiment_from(bag, false);
    ordered_json jc = experiment_config_json(cfg, "sweep");
    bool fixed = cfg.realizations == 0;
    double h1 = 0, h2 = 0, sinr_tol = bag.num("sinr-tol", 1e-9);
    if (fixed) {
        h1 = bag.required_num("h1");
        h2 = bag.required_num("h2");
        jc["h1"] = round12(h1);
        jc["h2"] = round12(h2);
    }

    struct Row {
        double value;
        sim::SchemeId scheme;
        double energy;
        double feasible_fraction;
    };
    std::vector<Row> rows;
    if (fixed) {
        for (double v : cfg.values)
            for (auto s : cfg.schemes) {
                bool ok;
                double e;
                fixed_sweep_row(cfg, v, s, h1, h2, sinr_tol, ok, e);
                rows.push_back({v, s, e, ok ? 1.0 : 0.0});
            }
    } else {
        auto table = sim::energy_sweep(cfg);
        for (const auto& r : table)
            rows.push_back({r.sweep_value, r.scheme, r.mean_energy,
                            r.trials ? static_cast<double>(r.feasible) / r.trials : 0.0});
    }

    std::string format = lower(bag.str("format", "csv"));
    if (format == "csv") {
        std::string out = "sweep_value,scheme,energy,feasible_fraction,seed\n";
        for (const auto& r : rows)
            out += fmt12(r.value) + "," + std::string(sim::scheme_id_name(r.scheme)) +
                   "," + fmt12(r.energy) + "," + fmt12(r.feasible_fraction) + "," +
                   std::to_string(cfg.seed) + "\n";
        write_output(out, bag.str("out", ""));
    } else {
        ordered_json j;
        j["command"] = "sweep";
        j["config"] = jc;
        ordered_json arr = ordered_json::array();
        for (const auto& r : rows) {
            ordered_json e;
            e["sweep_value"] = round12(r.value);
            e["scheme"] = std::string(sim::scheme_id_name(r.scheme));
            e["energy"] = round12(r.energy);
            e["feasible_fraction"] = round12(r.feasible_fraction);
            e["seed"] = cfg.seed;
            arr.push_back(e);
        }
        j["rows"] = arr;
        write_output(j.dump(2) + "\n", bag.str("out", ""));
    }
    return 0;
}

int cmd_monte_carlo(const OptBag& bag) {
    sim::ExperimentConfig cfg = experiment_from(bag, true);
    auto rows = sim::estimate_infeasibility(cfg);

    std::string format = lower(bag.str("format", "csv"));
    if (format == "csv") {
        std::string out =
            "sweep_value,scheme,infeasible_probability,std_error,infeasible_count,"
            "realizations,seed\n";
        for (const auto& r : rows)
            out += fmt12(r.sweep_value) + "," + std::string(sim::scheme_id_name(r.scheme)) +
                   "," + fmt12(r.probability) + "," + fmt12(r.std_error) + "," +
                   std::to_string(r.infeasible) + "," + std::to_string(r.trials) + "," +
                   std::to_string(cfg.seed) + "\n";
        write_output(out, bag.str("out", ""));
    } else {
        ordered_json j;
        j["command"] = "monte-carlo";
        j["config"] = experiment_config_json(cfg, "monte-carlo");
        ordered_json arr = ordered_json::array();
        for (const auto& r : rows) {
            ordered_json e;
            e["sweep_value"] = round12(r.sweep_value);
            e["scheme"] = std::string(sim::scheme_id_name(r.scheme));
            e["infeasible_probability"] = round12(r.probability);
            e["std_error"] = round12(r.std_error);
            e["infeasible_count"] = r.infeasible;
            e["realizations"] = r.trials;
            e["seed"] = cfg.seed;
            arr.push_back(e);
        }
        j["rows"] = arr;
        write_output(j.dump(2) + "\n", bag.str("out", ""));
    }
    return 0;
}

int cmd_approx_gap(const OptBag& bag) {
    auto ms = parse_values(bag.str("m-values", "100,300,640,2000"));
    auto epss = parse_values(bag.str("eps-values", "1e-3,1e-6,1e-9"));
    int grid = static_cast<int>(bag.integer("grid", 2001));
    if (grid < 3) throw ConfigError("--grid must be >= 3");
    constexpr double ln2 = std::numbers::ln2;

    std::string out =
        "m,eps,a,beta,x_lo,x_mid,max_gap_bpcu,argmax_x,max_lower_gap_bpcu,"
        "f_lower_zero_x\n";
    for (double m : ms)
        for (double eps : epss) {
            auto ctx = approx::ApproxContext::make(m, eps);
            double beta = approx::critical_point().beta;
            double max_gap = 0.0, argmax = ctx.x_lo;
            double max_lgap = 0.0, zero_x = ctx.x_lo;
            if (ctx.has_convex_segment) {
                // gap between the chord upper bound and tangent lower bound
                for (int i = 0; i <= grid; ++i) {
                    double x = ctx.x_lo + (ctx.x_mid - ctx.x_lo) * i / grid;
                    double gap = approx::f_upper(x, ctx) - approx::f_lower(x, ctx);
                    if (gap > max_gap) {
                        max_gap = gap;
                        argmax = x;
                    }
                }
                // f - f_lower on the rate-positive part, largest where
                // the lower bound crosses zero
                zero_x = ctx.x_mid - ctx.f_mid / ctx.fprime_mid;
                for (int i = 0; i <= grid; ++i) {
                    double x = zero_x + (ctx.x_mid - zero_x) * i / grid;
                    double lgap = approx::f_exact(x, ctx.a) - approx::f_lower(x, ctx);
                    if (lgap > max_lgap) max_lgap = lgap;
                }
            }
            out += fmt12(m) + "," + fmt12(eps) + "," + fmt12(ctx.a) + "," + fmt12(beta) +
                   "," + fmt12(ctx.x_lo) + "," +
                   fmt12(ctx.has_convex_segment ? ctx.x_mid : ctx.x_lo) + "," +
                   fmt12(max_gap / ln2) + "," + fmt12(argmax) + "," +
                   fmt12(max_lgap / ln2) + "," + fmt12(zero_x) + "\n";
        }
    write_output(out, bag.str("out", ""));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-minimal power/blocklength/bit allocation for the "
                 "two-user finite-blocklength downlink"};
    app.require_subcommand(1);

    OptBag bag;
    auto* solve_noma = app.add_subcommand("solve-noma", "pure-NOMA energy minimization");
    auto* solve_hybrid =
        app.add_subcommand("solve-hybrid", "hybrid NOMA/TDMA energy minimization");
    auto* solve_tdma = app.add_subcommand("solve-tdma", "two-slot TDMA baseline");
    auto* min_latency =
        app.add_subcommand("min-latency", "smallest feasible user-2 latency");
    auto* feasibility = app.add_subcommand("feasibility", "feasibility test");
    auto* sweep = app.add_subcommand("sweep", "energy sweep (fixed channel or averaged)");
    auto* monte_carlo =
        app.add_subcommand("monte-carlo", "infeasibility probability estimation");
    auto* approx_gap =
        app.add_subcommand("approx-gap", "surrogate upper/lower bound gap surface");

    for (auto* cmd : {solve_noma, solve_hybrid, solve_tdma, min_latency, feasibility}) {
        add_scenario_options(cmd, bag);
        add_io_options(cmd, bag);
    }
    add_hybrid_options(solve_hybrid, bag);
    bag.add(solve_hybrid, "method", "golden (default) or exhaustive");
    bag.add(min_latency, "m2-cap", "search cap on m2 (default 1000000)");
    bag.add(feasibility, "scheme", "noma (default), tdma or hybrid");
    add_hybrid_options(feasibility, bag);

    for (auto* cmd : {sweep, monte_carlo}) {
        add_io_options(cmd, bag);
        add_channel_options(cmd, bag);
        add_hybrid_options(cmd, bag);
        bag.add(cmd, "axis", "sweep axis: d1, pmax-dbm or packets");
        bag.add(cmd, "values", "comma list or lo:hi:step");
        bag.add(cmd, "schemes", "comma list of noma,tdma,hybrid,shannon-noma");
        bag.add(cmd, "realizations", "channel realizations (sweep: 0 = fixed channel)");
        bag.add(cmd, "seed", "RNG seed (default 1)");
        bag.add(cmd, "condition", "realization filter: all, h1-less, h1-geq");
        bag.add(cmd, "n1", "user-1 information bits (default 256)");
        bag.add(cmd, "n2", "user-2 information bits (default 256)");
        bag.add(cmd, "d1", "user-1 deadline when the axis is not d1 (default 640)");
        bag.add(cmd, "d2", "user-2 deadline, symbols (default 640)");
        bag.add(cmd, "eps1", "user-1 block error probability (default 1e-6)");
        bag.add(cmd, "eps2", "user-2 block error probability (default 1e-6)");
        bag.add(cmd, "pmax", "power budget when the axis is not pmax-dbm (default 40dBm)");
        bag.add(cmd, "min-blocklength", "validity floor of the rate model (default 100)");
        bag.add(cmd, "sinr-tol", "bisection tolerance on SINR brackets (default 1e-9)");
        bag.add(cmd, "h1", "fixed user-1 gain (sweep with --realizations 0)");
        bag.add(cmd, "h2", "fixed user-2 gain (sweep with --realizations 0)");
    }

    add_io_options(approx_gap, bag);
    bag.add(approx_gap, "m-values", "blocklength grid (default 100,300,640,2000)");
    bag.add(approx_gap, "eps-values", "error-probability grid (default 1e-3,1e-6,1e-9)");
    bag.add(approx_gap, "grid", "points per segment (default 2001)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (auto v = bag.lookup("config")) bag.file = load_config_file(*v);

        if (solve_noma->parsed()) return cmd_solve_noma(bag);
        if (solve_hybrid->parsed()) return cmd_solve_hybrid(bag);
        if (solve_tdma->parsed()) return cmd_solve_tdma(bag);
        if (min_latency->parsed()) return cmd_min_latency(bag);
        if (feasibility->parsed()) return cmd_feasibility(bag);
        if (sweep->parsed()) return cmd_sweep(bag);
        if (monte_carlo->parsed()) return cmd_monte_carlo(bag);
        if (approx_gap->parsed()) return cmd_approx_gap(bag);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
