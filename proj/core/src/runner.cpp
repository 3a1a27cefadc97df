#include "cforge/runner.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cforge/asdim.hpp"
#include "cforge/coarse_check.hpp"

namespace cforge {
namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

[[noreturn]] void cfg_fail(const std::string& msg) { throw ConfigError(msg); }

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// "radius" is accepted everywhere "window" is; store one canonical key.
std::string canonical_key(const std::string& key) { return key == "radius" ? "window" : key; }

long long parse_int(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &pos);
    } catch (const std::exception&) {
        cfg_fail("key '" + key + "': not an integer: '" + value + "'");
    }
    if (pos != value.size()) cfg_fail("key '" + key + "': not an integer: '" + value + "'");
    return v;
}

// Splits on commas at parenthesis depth zero, so tuple-style element
// words survive intact.
std::vector<std::string> split_top_level(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    int depth = 0;
    for (char c : text) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(trim(cur));
    return parts;
}

// ---------------------------------------------------------------------
// config resolution

struct Resolved {
    ExperimentConfig cfg;
    Budget budget;
    int workers = 1;
    std::uint64_t seed = 0;
};

Resolved resolve(const ExperimentConfig& input) {
    Resolved r;
    r.cfg = input;
    if (!r.cfg.has("workers")) r.cfg.entries["workers"] = "1";
    if (!r.cfg.has("seed")) r.cfg.entries["seed"] = "0";
    if (r.cfg.has("qm") && !r.cfg.has("counting")) r.cfg.entries["counting"] = "overlapping";

    long long workers = r.cfg.get_int("workers");
    if (workers < 1 || workers > 256) cfg_fail("key 'workers': must be between 1 and 256");
    r.workers = static_cast<int>(workers);

    long long seed = r.cfg.get_int("seed");
    if (seed < 0) cfg_fail("key 'seed': must be nonnegative");
    r.seed = static_cast<std::uint64_t>(seed);

    if (r.cfg.has("budget")) {
        long long b = r.cfg.get_int("budget");
        if (b <= 0) cfg_fail("key 'budget': must be positive");
        r.budget.max_elements = b;
        r.budget.max_pairs = b;
    }
    if (r.cfg.has("counting")) {
        const std::string& c = r.cfg.raw("counting");
        if (c != "overlapping" && c != "disjoint")
            cfg_fail("key 'counting': expected 'overlapping' or 'disjoint', got '" + c + "'");
    }
    return r;
}

void need(const ExperimentConfig& cfg, const std::string& command,
          const std::vector<std::string>& keys) {
    for (const std::string& k : keys)
        if (!cfg.has(k)) cfg_fail("command '" + command + "' requires key '" + k + "'");
}

int window_of(const ExperimentConfig& cfg) {
    long long w = cfg.get_int("window");
    if (w < 1 || w > 1'000'000) cfg_fail("key 'window': must be between 1 and 1000000");
    return static_cast<int>(w);
}

std::vector<int> scales_of(const ExperimentConfig& cfg, const std::string& key) {
    std::vector<int> scales = cfg.get_int_list(key);
    if (scales.empty()) cfg_fail("key '" + key + "': must list at least one scale");
    for (int s : scales)
        if (s < 1) cfg_fail("key '" + key + "': scales must be positive");
    return scales;
}

// Scales four times the window radius or more see their neighborhoods
// truncated by the window boundary, so reports at such scales would
// reflect the truncation rather than the group.
void check_window_hygiene(int window, const std::vector<int>& scales) {
    int largest = *std::max_element(scales.begin(), scales.end());
    if (window < 4 * largest)
        cfg_fail("window hygiene: window (" + std::to_string(window) +
                 ") must be at least 4x the largest scale (" + std::to_string(4 * largest) + ")");
}

GroupDescriptor group_of(const ExperimentConfig& cfg, const std::string& key) {
    try {
        return GroupDescriptor::parse(cfg.raw(key));
    } catch (const std::exception& ex) {
        cfg_fail("key '" + key + "': " + ex.what());
    }
}

Quasimorphism qm_of(const ExperimentConfig& cfg, const GroupDescriptor& domain) {
    std::string spec = cfg.raw("qm");
    if (spec.rfind("brooks:", 0) == 0 && spec.find("counting=") == std::string::npos &&
        cfg.has("counting") && cfg.raw("counting") == "disjoint")
        spec += ",counting=disjoint";
    std::optional<GroupDescriptor> codomain;
    if (cfg.has("codomain")) codomain = group_of(cfg, "codomain");
    try {
        return Quasimorphism::parse(spec, domain, codomain);
    } catch (const std::exception& ex) {
        cfg_fail("key 'qm': " + std::string(ex.what()));
    }
}

TheoremInstance instance_of(const ExperimentConfig& cfg, int window, int scale_r,
                            const Budget& budget) {
    const std::string& name = cfg.raw("instance");
    const std::vector<std::string>& known = bundled_instance_names();
    if (std::find(known.begin(), known.end(), name) == known.end()) {
        std::string list;
        for (const std::string& k : known) list += (list.empty() ? "" : ", ") + k;
        cfg_fail("key 'instance': unknown instance '" + name + "' (known: " + list + ")");
    }
    return bundled_instance(name, window, scale_r, budget);
}

// ---------------------------------------------------------------------
// output helpers

void write_text(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) cfg_fail("cannot open output file: " + path.string());
    out << content;
    if (!out) cfg_fail("cannot write output file: " + path.string());
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

std::string csv_quote(const std::string& field) {
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

ordered_json envelope(const Resolved& res, const std::string& command,
                      const std::string& pipeline) {
    ordered_json j;
    j["schema"] = report_schema;
    j["version"] = tool_version;
    j["command"] = command;
    if (!pipeline.empty()) j["pipeline"] = pipeline;
    ordered_json c = ordered_json::object();
    for (const auto& [k, v] : res.cfg.entries) c[k] = v;
    j["config"] = c;
    return j;
}

ordered_json element_array(const GroupDescriptor& G, const std::vector<GroupElement>& elems) {
    ordered_json arr = ordered_json::array();
    for (const GroupElement& g : elems) arr.push_back(format_element(G, g));
    return arr;
}

ordered_json element_pair(const GroupDescriptor& A, const GroupElement& x,
                          const GroupDescriptor& B, const GroupElement& y) {
    return ordered_json::array({format_element(A, x), format_element(B, y)});
}

void status_line(std::ostream& out, const std::string& stage, bool pass, const fs::path& path) {
    out << stage << ": " << (pass ? "PASS" : "FAIL");
    if (!path.empty()) out << " -> " << path.string();
    out << "\n";
}

// ---------------------------------------------------------------------
// worker-parallel defect scan
//
// Mirrors the serial pair scan exactly: ordered pairs (x, y) in window
// order with outer index major, first pair wins the witness slot, and
// the constant is the largest norm among the left defects and their
// inverses.  Chunks split the outer index range, so merging the chunk
// results in ascending order reproduces the serial first-wins choice;
// the output is byte-identical for every worker count.

DefectReport defect_parallel(const Quasimorphism& f, const Ball& window,
                             const ProperMetric& codomain_metric, int workers,
                             const Budget& budget) {
    if (workers <= 1) return defect_observed(f, window, codomain_metric, budget);

    const GroupDescriptor& G = f.domain();
    const GroupDescriptor& H = f.codomain();

    std::vector<GroupElement> elems = window.elements();
    if (!window.contains(identity(G))) elems.push_back(identity(G));
    const std::size_t n = elems.size();
    charge_pairs(budget, static_cast<long long>(n) * static_cast<long long>(n),
                 "defect pair scan");

    std::vector<GroupElement> fx, fx_inv;
    fx.reserve(n);
    for (const GroupElement& x : elems) fx.push_back(f.eval(x));
    for (const GroupElement& v : fx) fx_inv.push_back(invert(H, v));

    using WitnessMap = std::map<GroupElement, std::pair<GroupElement, GroupElement>, ElementLess>;
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n ? n : 1);
    std::vector<WitnessMap> left_parts(w), right_parts(w);
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::thread> threads;
    threads.reserve(w);

    for (std::size_t t = 0; t < w; ++t) {
        const std::size_t lo = n * t / w, hi = n * (t + 1) / w;
        threads.emplace_back([&, t, lo, hi] {
            try {
                WitnessMap& left = left_parts[t];
                WitnessMap& right = right_parts[t];
                for (std::size_t i = lo; i < hi; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        GroupElement fxy = f.eval(compose(G, elems[i], elems[j]));
                        GroupElement dl = compose(H, compose(H, fx_inv[j], fx_inv[i]), fxy);
                        GroupElement dr = compose(H, compose(H, fx[i], fx[j]), invert(H, fxy));
                        left.emplace(std::move(dl), std::make_pair(elems[i], elems[j]));
                        right.emplace(std::move(dr), std::make_pair(elems[i], elems[j]));
                    }
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (std::thread& th : threads) th.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);

    DefectReport report;
    report.window_radius = window.radius;
    for (std::size_t t = 0; t < w; ++t) {
        for (const auto& [d, xy] : left_parts[t]) report.left_witnesses.emplace(d, xy);
        for (const auto& [d, xy] : right_parts[t]) report.right_witnesses.emplace(d, xy);
    }
    for (const auto& [d, xy] : report.left_witnesses) report.left_defect.push_back(d);
    for (const auto& [d, xy] : report.right_witnesses) report.right_defect.push_back(d);

    int C = 0;
    for (const GroupElement& z : report.left_defect) {
        C = std::max(C, codomain_metric.norm(z, budget));
        C = std::max(C, codomain_metric.norm(invert(H, z), budget));
    }
    report.C = C;
    return report;
}

// ---------------------------------------------------------------------
// commands

int cmd_ball(const Resolved& res, std::ostream& out) {
    need(res.cfg, "ball", {"group", "window", "out"});
    GroupDescriptor G = group_of(res.cfg, "group");
    int window = window_of(res.cfg);
    ProperMetric M = ProperMetric::word_metric(G);
    Ball ball = M.ball(identity(G), window, res.budget);

    std::ostringstream csv;
    csv << "element,norm\n";
    for (const auto& [g, norm] : ball.members) csv << csv_quote(format_element(G, g)) << "," << norm << "\n";
    fs::path path = res.cfg.raw("out");
    write_text(path, csv.str());
    out << "ball: PASS -> " << path.string() << " (" << ball.members.size() << " elements)\n";
    return exit_pass;
}

// Shared by the standalone command and the "all" pipeline; hands the
// defect report back so later stages can reuse the pair scan.
int defect_stage(const Resolved& res, const Quasimorphism& f, const ProperMetric& domain_metric,
                 const ProperMetric& codomain_metric, int window, const fs::path& path,
                 const std::string& pipeline, std::ostream& out, DefectReport& report) {
    const GroupDescriptor& G = f.domain();
    const GroupDescriptor& H = f.codomain();
    Ball ball = domain_metric.ball(identity(G), window, res.budget);
    report = defect_parallel(f, ball, codomain_metric, res.workers, res.budget);
    DefectMembershipReport membership =
        check_defect_membership(f, report.left_defect, ball, res.budget);

    ordered_json j = envelope(res, "defect", pipeline);
    ordered_json payload;
    payload["window_radius"] = report.window_radius;
    payload["C_obs"] = report.C;
    payload["left_size"] = report.left_defect.size();
    payload["right_size"] = report.right_defect.size();
    payload["left_defect"] = element_array(H, report.left_defect);
    payload["right_defect"] = element_array(H, report.right_defect);
    ordered_json mem;
    mem["pass"] = membership.pass;
    mem["pair_count"] = membership.pair_count;
    ordered_json fails = ordered_json::array();
    for (const auto& [x, y, d] : membership.failures)
        fails.push_back(ordered_json::array(
            {format_element(G, x), format_element(G, y), format_element(H, d)}));
    mem["failures"] = fails;
    payload["membership"] = mem;
    j["report"] = payload;
    write_json(path, j);
    status_line(out, "defect", membership.pass, path);
    return membership.pass ? exit_pass : exit_assertion_failed;
}

int cmd_defect(const Resolved& res, std::ostream& out) {
    need(res.cfg, "defect", {"group", "qm", "window", "out"});
    GroupDescriptor G = group_of(res.cfg, "group");
    Quasimorphism f = qm_of(res.cfg, G);
    ProperMetric dm = ProperMetric::word_metric(G);
    ProperMetric cm = ProperMetric::word_metric(f.codomain());
    DefectReport unused;
    return defect_stage(res, f, dm, cm, window_of(res.cfg), res.cfg.raw("out"), "", out, unused);
}

int cmd_approx_check(const Resolved& res, std::ostream& out) {
    need(res.cfg, "approx-check", {"spec", "window"});
    std::optional<GroupDescriptor> ambient;
    if (res.cfg.has("group")) ambient = group_of(res.cfg, "group");
    std::optional<ApproximateGroup> parsed;
    try {
        parsed = ApproximateGroup::parse(res.cfg.raw("spec"), ambient);
    } catch (const std::exception& ex) {
        cfg_fail("key 'spec': " + std::string(ex.what()));
    }
    const ApproximateGroup& lambda = *parsed;
    const GroupDescriptor& G = lambda.ambient();

    std::vector<GroupElement> F;
    if (res.cfg.has("F")) {
        for (const std::string& word : split_top_level(res.cfg.raw("F"))) {
            try {
                F.push_back(parse_element(G, word));
            } catch (const std::exception& ex) {
                cfg_fail("key 'F': cannot parse element '" + word + "': " + ex.what());
            }
        }
    } else if (lambda.witness_F()) {
        F = *lambda.witness_F();
    } else {
        cfg_fail("key 'F': required, spec '" + res.cfg.raw("spec") +
                 "' carries no built-in approximation set");
    }

    int window = window_of(res.cfg);
    ProperMetric M = ProperMetric::word_metric(G);
    Ball ball = M.ball(identity(G), window, res.budget);
    TaoReport rep = verify_tao_axioms(lambda, F, ball, res.budget);

    ordered_json j = envelope(res, "approx-check", "");
    ordered_json payload;
    payload["spec"] = lambda.to_string();
    payload["F"] = element_array(G, F);
    payload["window_radius"] = rep.window_radius;
    payload["pass"] = rep.pass;
    payload["unital"] = rep.unital;
    payload["symmetric"] = rep.symmetric;
    payload["products_covered"] = rep.products_covered;
    payload["member_count"] = rep.member_count;
    payload["pair_count"] = rep.pair_count;
    payload["f_size"] = rep.f_size;
    if (rep.failing_pair)
        payload["failing_pair"] =
            element_pair(G, rep.failing_pair->first, G, rep.failing_pair->second);
    if (rep.failing_product) payload["failing_product"] = format_element(G, *rep.failing_product);
    if (rep.symmetry_witness)
        payload["symmetry_witness"] = format_element(G, *rep.symmetry_witness);
    j["report"] = payload;

    fs::path path;
    if (res.cfg.has("out")) {
        path = res.cfg.raw("out");
        write_json(path, j);
    }
    status_line(out, "approx-check", rep.pass, path);
    return rep.pass ? exit_pass : exit_assertion_failed;
}

int lipschitz_stage(const Resolved& res, const TheoremInstance& inst, const DefectReport& defect,
                    const std::vector<int>& t_values, const fs::path& path,
                    const std::string& pipeline, std::ostream& out) {
    LipschitzScanReport scan = lipschitz_scan(inst, t_values, defect, res.budget);
    SymmetryGapReport sym = symmetry_gap(inst, res.budget);
    const GroupDescriptor& G = inst.f.domain();

    ordered_json j = envelope(res, "lipschitz", pipeline);
    ordered_json payload;
    payload["instance"] = inst.name;
    payload["window_radius"] = inst.window_radius;
    payload["C_obs"] = scan.C_obs;
    payload["pass"] = scan.pass && sym.pass;
    ordered_json samples = ordered_json::array();
    for (const LipschitzSample& s : scan.samples) {
        ordered_json row;
        row["t"] = s.t;
        row["s_obs"] = s.s_obs;
        row["S_t"] = s.S_t;
        row["bound"] = s.bound;
        row["pass"] = s.pass;
        if (s.witness) row["witness"] = element_pair(G, s.witness->first, G, s.witness->second);
        samples.push_back(row);
    }
    payload["samples"] = samples;
    ordered_json symmetry;
    symmetry["gap"] = sym.gap;
    symmetry["bound"] = 2 * sym.C_obs;
    symmetry["pass"] = sym.pass;
    if (sym.witness) symmetry["witness"] = format_element(G, *sym.witness);
    payload["symmetry"] = symmetry;
    j["report"] = payload;
    write_json(path, j);

    const bool ok = scan.pass && sym.pass;
    status_line(out, "lipschitz", ok, path);
    return ok ? exit_pass : exit_assertion_failed;
}

int containment_stage(const Resolved& res, const TheoremInstance& inst,
                      const DefectReport& defect, const fs::path& path,
                      const std::string& pipeline, std::ostream& out) {
    ContainmentReport con = containment_almost(inst, defect, res.budget);
    AbsorptionReport abs = r_neighborhood_absorption(inst, defect, res.budget);
    const GroupDescriptor& G = inst.f.domain();
    const GroupDescriptor& H = inst.f.codomain();

    ordered_json j = envelope(res, "containment", pipeline);
    ordered_json payload;
    payload["instance"] = inst.name;

    ordered_json cj;
    cj["pass"] = con.pass;
    cj["window_radius"] = con.window_radius;
    cj["scale_r"] = con.scale_r;
    cj["target_size"] = con.target.size();
    cj["target"] = element_array(H, con.target);
    ordered_json reps = ordered_json::array();
    for (const auto& [lambda, xi] : con.representatives) reps.push_back(element_pair(H, lambda, G, xi));
    cj["representatives"] = reps;
    ordered_json cfails = ordered_json::array();
    for (const auto& [lambda, xi] : con.failures) cfails.push_back(element_pair(H, lambda, G, xi));
    cj["failures"] = cfails;
    if (con.repaired_window_radius) cj["repaired_window_radius"] = *con.repaired_window_radius;
    payload["containment"] = cj;

    ordered_json aj;
    aj["pass"] = abs.pass;
    aj["R"] = abs.R;
    aj["window_radius"] = abs.window_radius;
    aj["scale_r"] = abs.scale_r;
    ordered_json areps = ordered_json::array();
    for (const auto& [tau, xi] : abs.representatives) areps.push_back(element_pair(H, tau, G, xi));
    aj["representatives"] = areps;
    aj["kernel_size"] = abs.kernel.size();
    aj["kernel"] = element_array(G, abs.kernel);
    aj["failures"] = element_array(G, abs.failures);
    payload["absorption"] = aj;
    j["report"] = payload;
    write_json(path, j);

    const bool ok = con.pass && abs.pass;
    status_line(out, "containment", ok, path);
    return ok ? exit_pass : exit_assertion_failed;
}

int kernel_stage(const Resolved& res, const TheoremInstance& inst, const DefectReport& defect,
                 const fs::path& path, const std::string& pipeline, std::ostream& out) {
    std::vector<GroupElement> K = kernel_window(inst, defect, res.budget);
    const GroupDescriptor& G = inst.f.domain();
    ElementLess less;
    GroupElement e = identity(G);
    bool has_identity = std::any_of(K.begin(), K.end(),
                                    [&](const GroupElement& g) { return !less(g, e) && !less(e, g); });

    ordered_json j = envelope(res, "kernel", pipeline);
    ordered_json payload;
    payload["instance"] = inst.name;
    payload["window_radius"] = inst.window_radius;
    payload["size"] = K.size();
    payload["contains_identity"] = has_identity;
    payload["members"] = element_array(G, K);
    j["report"] = payload;
    write_json(path, j);

    status_line(out, "kernel", has_identity, path);
    return has_identity ? exit_pass : exit_assertion_failed;
}

int cmd_color(const Resolved& res, std::ostream& out) {
    need(res.cfg, "color", {"group", "window", "r", "max_colors", "D"});
    GroupDescriptor G = group_of(res.cfg, "group");
    int window = window_of(res.cfg);
    long long r = res.cfg.get_int("r");
    long long max_colors = res.cfg.get_int("max_colors");
    long long D = res.cfg.get_int("D");
    if (r < 1) cfg_fail("key 'r': must be positive");
    if (max_colors < 1) cfg_fail("key 'max_colors': must be positive");
    if (D < 0) cfg_fail("key 'D': must be nonnegative");
    check_window_hygiene(window, {static_cast<int>(r)});

    ProperMetric M = ProperMetric::word_metric(G);
    Ball ball = M.ball(identity(G), window, res.budget);
    GreedyCoverResult result =
        greedy_cover(ball.elements(), M, static_cast<int>(r), static_cast<int>(max_colors),
                     static_cast<int>(D), res.seed, res.budget);
    CoverValidation validation = validate_coloring(result.cover, M, res.budget);

    ordered_json j = envelope(res, "color", "");
    ordered_json payload;
    payload["success"] = result.success;
    payload["colors"] = result.colors;
    payload["max_colors"] = max_colors;
    payload["scale_r"] = result.cover.scale_r;
    payload["D_budget"] = D;
    payload["D_observed"] = result.cover.bound_D;
    payload["strategy"] = result.strategy;
    payload["point_count"] = result.cover.points.size();
    payload["cluster_count"] = result.cover.clusters.size();
    payload["validator_pass"] = validation.pass;
    ordered_json clusters = ordered_json::array();
    for (const auto& [members, color] : result.cover.clusters) {
        ordered_json c;
        c["color"] = color;
        c["size"] = members.size();
        c["members"] = element_array(G, members);
        clusters.push_back(c);
    }
    payload["clusters"] = clusters;
    j["report"] = payload;

    fs::path path;
    if (res.cfg.has("out")) {
        path = res.cfg.raw("out");
        write_json(path, j);
    }
    const bool ok = result.success && validation.pass;
    status_line(out, "color", ok, path);
    return ok ? exit_pass : exit_assertion_failed;
}

int hurewicz_stage(const Resolved& res, const TheoremInstance& inst, const std::vector<int>& scales,
                   const fs::path& path, const std::string& pipeline, std::ostream& out) {
    HurewiczReport rep = hurewicz_report(inst, scales, res.seed, res.budget);

    ordered_json j = envelope(res, "hurewicz", pipeline);
    ordered_json payload;
    payload["instance"] = rep.instance_name;
    payload["window_radius"] = rep.window_radius;
    payload["scale_policy"] = rep.scale_policy;
    payload["all_rows_pass"] = rep.all_rows_pass;
    ordered_json rows = ordered_json::array();
    for (const HurewiczScaleRow& row : rep.rows) {
        ordered_json rj;
        rj["r"] = row.r;
        rj["colors_X"] = row.colors_X;
        rj["colors_Y"] = row.colors_Y;
        rj["colors_K"] = row.colors_K;
        rj["D_X"] = row.D_X;
        rj["D_Y"] = row.D_Y;
        rj["D_K"] = row.D_K;
        rj["inequality_holds"] = row.inequality_holds;
        rj["lipschitz_pass"] = row.lipschitz_pass;
        rj["containment_pass"] = row.containment_pass;
        rj["absorption_pass"] = row.absorption_pass;
        rj["C_obs"] = row.C_obs;
        rj["pullback_colors"] = row.pullback_colors;
        rj["pullback_D"] = row.pullback_D;
        rj["pullback_scale_Y"] = row.pullback_scale_Y;
        rj["pullback_valid"] = row.pullback_valid;
        rows.push_back(rj);
    }
    payload["rows"] = rows;
    j["report"] = payload;
    write_json(path, j);

    std::ostringstream csv;
    csv << "r,colors_X,colors_Y,colors_K,D_X,D_Y,D_K\n";
    for (const HurewiczScaleRow& row : rep.rows)
        csv << row.r << "," << row.colors_X << "," << row.colors_Y << "," << row.colors_K << ","
            << row.D_X << "," << row.D_Y << "," << row.D_K << "\n";
    fs::path csv_path = path;
    csv_path.replace_extension(".csv");
    write_text(csv_path, csv.str());

    status_line(out, "hurewicz", rep.all_rows_pass, path);
    return rep.all_rows_pass ? exit_pass : exit_assertion_failed;
}

int cmd_lipschitz(const Resolved& res, std::ostream& out) {
    need(res.cfg, "lipschitz", {"instance", "window", "scales", "out"});
    int window = window_of(res.cfg);
    std::vector<int> ts = scales_of(res.cfg, "scales");
    check_window_hygiene(window, ts);
    TheoremInstance inst = instance_of(res.cfg, window, 1, res.budget);
    DefectReport defect = instance_defect(inst, res.budget);
    return lipschitz_stage(res, inst, defect, ts, res.cfg.raw("out"), "", out);
}

int cmd_containment(const Resolved& res, std::ostream& out) {
    need(res.cfg, "containment", {"instance", "window", "r", "out"});
    int window = window_of(res.cfg);
    long long r = res.cfg.get_int("r");
    if (r < 1) cfg_fail("key 'r': must be positive");
    check_window_hygiene(window, {static_cast<int>(r)});
    TheoremInstance inst = instance_of(res.cfg, window, static_cast<int>(r), res.budget);
    DefectReport defect = instance_defect(inst, res.budget);
    return containment_stage(res, inst, defect, res.cfg.raw("out"), "", out);
}

int cmd_kernel(const Resolved& res, std::ostream& out) {
    need(res.cfg, "kernel", {"instance", "window", "out"});
    int window = window_of(res.cfg);
    TheoremInstance inst = instance_of(res.cfg, window, 1, res.budget);
    DefectReport defect = instance_defect(inst, res.budget);
    return kernel_stage(res, inst, defect, res.cfg.raw("out"), "", out);
}

int cmd_hurewicz(const Resolved& res, std::ostream& out) {
    need(res.cfg, "hurewicz", {"instance", "window", "scales", "out"});
    int window = window_of(res.cfg);
    std::vector<int> scales = scales_of(res.cfg, "scales");
    check_window_hygiene(window, scales);
    TheoremInstance inst = instance_of(res.cfg, window, 1, res.budget);
    return hurewicz_stage(res, inst, scales, res.cfg.raw("out"), "", out);
}

int cmd_all(Resolved res, std::ostream& out) {
    need(res.cfg, "all", {"instance", "window", "scales", "out"});
    int window = window_of(res.cfg);
    std::vector<int> scales = scales_of(res.cfg, "scales");
    if (!res.cfg.has("r"))
        res.cfg.entries["r"] = std::to_string(*std::min_element(scales.begin(), scales.end()));
    long long r = res.cfg.get_int("r");
    if (r < 1) cfg_fail("key 'r': must be positive");
    std::vector<int> hygiene = scales;
    hygiene.push_back(static_cast<int>(r));
    check_window_hygiene(window, hygiene);

    fs::path dir = res.cfg.raw("out");
    std::error_code ec;
    fs::create_directories(dir, ec);

    TheoremInstance inst = instance_of(res.cfg, window, static_cast<int>(r), res.budget);
    DefectReport defect;
    int status = defect_stage(res, inst.f, inst.domain_metric, inst.codomain_metric, window,
                              dir / "defect.json", "all", out, defect);
    status = std::max(status, lipschitz_stage(res, inst, defect, scales, dir / "lipschitz.json",
                                              "all", out));
    status = std::max(status, containment_stage(res, inst, defect, dir / "containment.json",
                                                "all", out));
    status = std::max(status, kernel_stage(res, inst, defect, dir / "kernel.json", "all", out));
    status = std::max(status, hurewicz_stage(res, inst, scales, dir / "hurewicz.json", "all", out));
    return status;
}

}  // namespace

// ---------------------------------------------------------------------
// ExperimentConfig

bool ExperimentConfig::has(const std::string& key) const { return entries.count(key) != 0; }

const std::string& ExperimentConfig::raw(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) cfg_fail("missing key '" + key + "'");
    return it->second;
}

std::string ExperimentConfig::get_string(const std::string& key) const { return raw(key); }

long long ExperimentConfig::get_int(const std::string& key) const {
    return parse_int(key, raw(key));
}

long long ExperimentConfig::get_int_or(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::vector<int> ExperimentConfig::get_int_list(const std::string& key) const {
    std::vector<int> values;
    for (const std::string& part : split_top_level(raw(key))) {
        if (part.empty()) cfg_fail("key '" + key + "': empty list entry");
        long long v = parse_int(key, part);
        if (v < INT32_MIN || v > INT32_MAX) cfg_fail("key '" + key + "': value out of range");
        values.push_back(static_cast<int>(v));
    }
    return values;
}

ExperimentConfig load_config(const std::optional<std::string>& config_path,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
    ExperimentConfig cfg;
    if (config_path) {
        std::ifstream in(*config_path);
        if (!in) cfg_fail("cannot open config file: " + *config_path);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string text = trim(line);
            if (text.empty() || text[0] == '#') continue;
            std::size_t eq = text.find('=');
            if (eq == std::string::npos)
                cfg_fail(*config_path + ":" + std::to_string(line_no) +
                         ": expected key=value, got '" + text + "'");
            std::string key = canonical_key(trim(text.substr(0, eq)));
            if (key.empty())
                cfg_fail(*config_path + ":" + std::to_string(line_no) + ": empty key");
            cfg.entries[key] = trim(text.substr(eq + 1));
        }
    }
    for (const auto& [key, value] : overrides) cfg.entries[canonical_key(key)] = value;
    return cfg;
}

int run(const ExperimentConfig& config, const std::string& command, std::ostream& out,
        std::ostream& err) {
    try {
        Resolved res = resolve(config);
        if (command == "ball") return cmd_ball(res, out);
        if (command == "defect") return cmd_defect(res, out);
        if (command == "approx-check") return cmd_approx_check(res, out);
        if (command == "lipschitz") return cmd_lipschitz(res, out);
        if (command == "containment") return cmd_containment(res, out);
        if (command == "kernel") return cmd_kernel(res, out);
        if (command == "color") return cmd_color(res, out);
        if (command == "hurewicz") return cmd_hurewicz(res, out);
        if (command == "all") return cmd_all(res, out);
        cfg_fail("unknown command '" + command + "'");
    } catch (const ConfigError& ex) {
        err << "config error: " << ex.what() << "\n";
        return exit_config_error;
    } catch (const BudgetExceeded& ex) {
        err << "budget exceeded: " << ex.what() << "\n";
        return exit_config_error;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return exit_config_error;
    }
}

int run(const ExperimentConfig& config, const std::string& command) {
    return run(config, command, std::cout, std::cerr);
}

}  // namespace cforge
