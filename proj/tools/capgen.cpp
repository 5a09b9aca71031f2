// capgen: seed-efficient points on the sphere (and Gaussians) that fool
// halfspaces, plus the verification campaigns around the construction.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "capgen/harness.hpp"
#include "capgen/io.hpp"
#include "capgen/orth_design.hpp"
#include "capgen/pipeline.hpp"

namespace {

using capgen::json;

struct GlobalOptions {
    std::string config_path;
    capgen::PipelineParams params;
};

void apply_config(GlobalOptions& g) {
    if (g.config_path.empty()) return;
    std::ifstream in(g.config_path);
    if (!in) throw capgen::ValidationError("cannot open config file: " + g.config_path);
    json cfg;
    in >> cfg;
    auto& p = g.params;
    if (cfg.contains("c_q")) p.c_q = cfg["c_q"].get<double>();
    if (cfg.contains("c_k")) p.c_k = cfg["c_k"].get<double>();
    if (cfg.contains("c_inw")) p.c_inw = cfg["c_inw"].get<double>();
    if (cfg.contains("b_slack")) p.b_slack = cfg["b_slack"].get<int>();
    if (cfg.contains("base_floor")) p.floor_min = cfg["base_floor"].get<std::uint64_t>();
    if (cfg.contains("floor_override"))
        p.floor_override = cfg["floor_override"].get<std::uint64_t>();
    if (cfg.contains("generator_set"))
        p.generator_override = std::make_shared<const capgen::GeneratorSet>(
            capgen::load_generator_set_file(cfg["generator_set"].get<std::string>()));
}

capgen::SeedMode parse_seed_mode(const std::string& s, std::uint64_t& count) {
    if (s == "exhaustive") return capgen::SeedMode::exhaustive;
    if (s.rfind("sampled:", 0) == 0) {
        count = std::stoull(s.substr(8));
        return capgen::SeedMode::sampled;
    }
    throw capgen::ValidationError("seed-mode must be 'exhaustive' or 'sampled:M'");
}

capgen::ReferenceMode parse_reference(const std::string& s, std::uint64_t& count) {
    if (s == "exact") return capgen::ReferenceMode::exact_cdf;
    if (s.rfind("mc:", 0) == 0) {
        count = std::stoull(s.substr(3));
        return capgen::ReferenceMode::monte_carlo;
    }
    throw capgen::ValidationError("reference must be 'exact' or 'mc:M'");
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw capgen::ValidationError("cannot open output file: " + out_path);
    out << text << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudorandom generator for spherical caps and Gaussian halfspaces"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--config", g.config_path, "JSON config: constants and generator-set override");

    // gen
    std::uint64_t gen_dim = 0;
    double gen_eps = 0.1;
    std::string gen_seed, gen_out = "json";
    bool gen_gaussian = false;
    auto* gen = app.add_subcommand("gen", "emit one generator output vector");
    gen->add_option("--dim", gen_dim, "ambient dimension n")->required();
    gen->add_option("--eps", gen_eps, "target error")->required();
    gen->add_option("--seed", gen_seed, "lowercase hex seed")->required();
    gen->add_flag("--gaussian", gen_gaussian, "Gaussian variant");
    gen->add_option("--out", gen_out, "json|raw")->check(CLI::IsMember({"json", "raw"}));

    // seedlen
    std::uint64_t sl_dim = 0;
    double sl_eps = 0.1;
    bool sl_gaussian = false;
    auto* seedlen = app.add_subcommand("seedlen", "print the exact seed length in bits");
    seedlen->add_option("--dim", sl_dim, "ambient dimension n")->required();
    seedlen->add_option("--eps", sl_eps, "target error")->required();
    seedlen->add_flag("--gaussian", sl_gaussian, "Gaussian variant");

    // verify
    auto* verify = app.add_subcommand("verify", "verification campaigns");
    verify->require_subcommand(1);

    std::uint64_t vc_dim = 0;
    double vc_eps = 0.25;
    int vc_caps = 50;
    std::string vc_seed_mode = "exhaustive", vc_reference = "exact", vc_out;
    auto* vcaps = verify->add_subcommand("caps", "cap-discrepancy report");
    vcaps->add_option("--dim", vc_dim)->required();
    vcaps->add_option("--eps", vc_eps)->required();
    vcaps->add_option("--caps", vc_caps, "number of random caps");
    vcaps->add_option("--seed-mode", vc_seed_mode, "exhaustive|sampled:M");
    vcaps->add_option("--reference", vc_reference, "exact|mc:M");
    vcaps->add_option("--out", vc_out, "output JSON file (stdout when omitted)");

    int vm_dim = 0, vm_order = 2;
    std::uint64_t vm_samples = 4096;
    auto* vmom = verify->add_subcommand("moments", "projected-length moment audit");
    vmom->add_option("--dim", vm_dim)->required();
    vmom->add_option("--order", vm_order, "moment-matching order k");
    vmom->add_option("--design-samples", vm_samples);

    int vd_dim = 0, vd_degree = 1, vd_walk = 8;
    std::uint64_t vd_samples = 4096, vd_haar = 100000;
    auto* vdes = verify->add_subcommand("design", "design tensor-power deviation");
    vdes->add_option("--dim", vd_dim)->required();
    vdes->add_option("--degree", vd_degree);
    vdes->add_option("--walk", vd_walk);
    vdes->add_option("--samples", vd_samples);
    vdes->add_option("--haar-samples", vd_haar);

    // bounds
    std::vector<int> b_klist{2, 4};
    std::vector<double> b_dlist{0.01, 0.1};
    int b_m = 0, b_mtilde = 0;
    std::string b_out;
    auto* bounds = app.add_subcommand("bounds", "moment-to-CDF bound table (CSV)");
    bounds->add_option("--k-list", b_klist)->delimiter(',');
    bounds->add_option("--delta-list", b_dlist)->delimiter(',');
    bounds->add_option("--m", b_m)->required();
    bounds->add_option("--mtilde", b_mtilde)->required();
    bounds->add_option("--out", b_out, "output CSV file (stdout when omitted)");

    // demo gw
    auto* demo = app.add_subcommand("demo", "demos");
    demo->require_subcommand(1);
    std::string gw_graph, gw_seeds = "1024", gw_out;
    double gw_eps = 0.2;
    auto* gw = demo->add_subcommand("gw", "hyperplane-rounding max-cut demo");
    gw->add_option("--graph", gw_graph, "graph + embedding file")->required();
    gw->add_option("--eps", gw_eps);
    gw->add_option("--seeds", gw_seeds, "seed count or 'exhaustive'");
    gw->add_option("--out", gw_out, "output JSON file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        apply_config(g);

        if (*gen) {
            capgen::SeedStream stream = capgen::SeedStream::from_hex(gen_seed);
            std::vector<double> x = gen_gaussian
                                        ? capgen::gaussian_generate(gen_dim, gen_eps, stream, g.params)
                                        : capgen::generate(gen_dim, gen_eps, stream, g.params);
            if (gen_out == "raw") {
                std::string text;
                char buf[40];
                for (double v : x) {
                    std::snprintf(buf, sizeof buf, "%.17g", v);
                    text += buf;
                    text += '\n';
                }
                if (!text.empty()) text.pop_back();
                emit(text, "");
            } else {
                json j;
                j["dim"] = gen_dim;
                j["eps"] = gen_eps;
                j["gaussian"] = gen_gaussian;
                j["seed"] = gen_seed;
                j["bits_consumed"] = stream.bits_consumed();
                j["data"] = x;
                emit(j.dump(), "");
            }
        } else if (*seedlen) {
            std::cout << capgen::seed_length(sl_dim, sl_eps, g.params, sl_gaussian) << "\n";
        } else if (*vcaps) {
            std::uint64_t sampled = 0, mc = 0;
            capgen::SeedMode sm = parse_seed_mode(vc_seed_mode, sampled);
            capgen::ReferenceMode rm = parse_reference(vc_reference, mc);
            capgen::DiscrepancyReport rep =
                capgen::cap_discrepancy(vc_dim, vc_eps, vc_caps, sm, sampled, rm, mc, g.params);
            emit(rep.to_json().dump(2), vc_out);
        } else if (*vmom) {
            int mt = capgen::ceil_sqrt(vm_dim);
            auto rows = capgen::moment_audit(vm_dim, mt, vm_order, vm_samples, 0.1, g.params);
            std::cout << "j,oracle,design,diff\n";
            for (const auto& r : rows)
                std::printf("%d,%.12g,%.12g,%.3g\n", r.order, r.oracle, r.design, r.diff);
        } else if (*vdes) {
            capgen::DesignConfig cfg{capgen::basis_for_dim(std::uint64_t(vd_dim), g.params),
                                     vd_walk, vd_degree, 0.5};
            capgen::DesignDeviation dev =
                capgen::design_deviation(cfg, vd_degree, vd_samples, vd_haar);
            json j;
            j["dim"] = vd_dim;
            j["degree"] = vd_degree;
            j["walk"] = vd_walk;
            j["deviation"] = dev.deviation;
            j["sigma_est"] = dev.sigma_est;
            j["exact"] = dev.exact;
            emit(j.dump(), "");
        } else if (*bounds) {
            auto rows = capgen::bound_table(b_klist, b_dlist, b_m, b_mtilde);
            std::string csv = capgen::bound_table_csv(rows);
            if (!csv.empty() && csv.back() == '\n') csv.pop_back();
            emit(csv, b_out);
        } else if (*gw) {
            std::ifstream in(gw_graph);
            if (!in) throw capgen::ValidationError("cannot open graph file: " + gw_graph);
            capgen::GwInstance inst = capgen::parse_gw_instance(in);
            bool exhaustive = (gw_seeds == "exhaustive");
            std::uint64_t count = exhaustive ? 0 : std::stoull(gw_seeds);
            capgen::GwReport rep = capgen::gw_demo(inst, gw_eps, count, exhaustive, g.params);
            emit(rep.to_json().dump(2), gw_out);
        }
    } catch (const capgen::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const capgen::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
