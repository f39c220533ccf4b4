// Command-line driver: frequency sweeps over the five solve approaches,
// diagnostic reports (block scaling, Gram conditioning, spectra), and mesh
// inspection.  Configuration comes from an optional flat key=value file with
// command-line overrides on top.
#include <efie/diagnostics.hpp>
#include <efie/experiment.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace efie;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<double> sphere;  // R L
    std::string mesh_file;
    std::vector<double> k_range; // lo hi npts (log-spaced)
    std::string k_list;          // comma separated, overrides k_range
    std::string approaches = "";
    std::string out_dir = ".";
    bool deterministic = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "flat key=value config file");
    cmd->add_option("--sphere", a.sphere,
                    "icosphere scatterer: radius and subdivision level")
        ->expected(2);
    cmd->add_option("--mesh", a.mesh_file, "triangle mesh file (v/f records)");
    cmd->add_option("--k-range", a.k_range,
                    "log-spaced wavenumber sweep: lo hi npts")
        ->expected(3);
    cmd->add_option("--k", a.k_list, "explicit wavenumber list, comma separated");
    cmd->add_option("--approach", a.approaches,
                    "approaches to run, comma separated (1-5)");
    cmd->add_option("--out", a.out_dir, "output directory for CSV files");
    cmd->add_flag("--deterministic", a.deterministic,
                  "write zero wall time for byte-stable reruns");
}

Config load_config(const CommonArgs& a) {
    Config cfg;
    if (!a.config_path.empty()) cfg = Config::from_file(a.config_path);
    if (a.sphere.size() == 2) {
        cfg.set("sphere.radius", std::to_string(a.sphere[0]));
        cfg.set("sphere.level", std::to_string(int(a.sphere[1])));
    }
    if (!a.mesh_file.empty()) cfg.set("mesh.file", a.mesh_file);
    if (a.k_range.size() == 3) {
        cfg.set("sweep.k_lo", std::to_string(a.k_range[0]));
        cfg.set("sweep.k_hi", std::to_string(a.k_range[1]));
        cfg.set("sweep.k_n", std::to_string(int(a.k_range[2])));
        cfg.values.erase("sweep.k_list");
    }
    if (!a.k_list.empty()) cfg.set("sweep.k_list", a.k_list);
    if (!a.approaches.empty()) cfg.set("sweep.approaches", a.approaches);
    if (a.deterministic) cfg.set("sweep.deterministic", "1");
    cfg.set("output.dir", a.out_dir);
    return cfg;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<double> k_sweep(const Config& cfg) {
    std::vector<double> ks;
    if (cfg.has("sweep.k_list")) {
        for (const std::string& tok : split_csv(cfg.get_string("sweep.k_list", ""))) {
            const std::string t = Config::trim(tok);
            if (t.empty()) continue;
            ks.push_back(std::stod(t));
        }
    } else if (cfg.has("sweep.k_lo")) {
        const double lo = cfg.get_double("sweep.k_lo", 0.0);
        const double hi = cfg.get_double("sweep.k_hi", lo);
        const int n = cfg.get_int("sweep.k_n", 1);
        if (lo <= 0.0 || hi <= 0.0 || n < 1)
            throw ConfigError("k range needs positive endpoints and npts >= 1");
        for (int i = 0; i < n; ++i)
            ks.push_back(n == 1 ? lo
                                : lo * std::pow(hi / lo, double(i) / double(n - 1)));
    }
    if (ks.empty())
        throw ConfigError("empty k sweep: pass --k, --k-range, or sweep.* keys");
    for (double k : ks)
        if (!(k > 0.0)) throw ConfigError("wavenumbers must be positive");
    return ks;
}

std::vector<int> approach_list(const Config& cfg, const std::string& dflt) {
    std::vector<int> out;
    for (const std::string& tok :
         split_csv(cfg.get_string("sweep.approaches", dflt))) {
        const std::string t = Config::trim(tok);
        if (t.empty()) continue;
        out.push_back(std::stoi(t));
    }
    if (out.empty()) throw ConfigError("empty approach list");
    for (int a : out)
        if (a < 1 || a > 5) throw ConfigError("approach must be in 1..5");
    return out;
}

Mesh make_scatterer(const Config& cfg) {
    if (cfg.has("mesh.file")) return load_mesh(cfg.get_string("mesh.file", ""));
    const double radius = cfg.get_double("sphere.radius", 0.25);
    const int level = cfg.get_int("sphere.level", 2);
    if (!(radius > 0.0)) throw ConfigError("sphere radius must be positive");
    if (level < 0 || level > 6) throw ConfigError("sphere level must be in 0..6");
    return make_sphere(radius, level);
}

std::ofstream open_csv(const Config& cfg, const std::string& name) {
    const std::filesystem::path dir = cfg.get_string("output.dir", ".");
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open output file: " + (dir / name).string());
    return out;
}

int run_sweep_cmd(const CommonArgs& args) {
    const Config cfg = load_config(args);
    if (cfg.has("mesh.file"))
        throw ConfigError(
            "sweep compares against the analytic sphere reference; use --sphere");
    SweepRequest req;
    req.radius = cfg.get_double("sphere.radius", 0.25);
    req.level = cfg.get_int("sphere.level", 2);
    if (!(req.radius > 0.0)) throw ConfigError("sphere radius must be positive");
    req.ks = k_sweep(cfg);
    req.approaches = approach_list(cfg, "1,2,3,4,5");
    req.deterministic = cfg.get_int("sweep.deterministic", 0) != 0;

    const std::vector<ResultRow> rows = run_sweep(req, cfg);
    std::ofstream out = open_csv(cfg, "results.csv");
    out << results_csv(rows);
    for (const ResultRow& r : rows)
        std::printf("approach %d  k %-10.4g  error %-12.6g  outer %4d  inner %6ld  %s\n",
                    r.approach, r.k, r.rel_error, r.outer_iters, r.inner_iters,
                    r.converged ? "converged" : "DID NOT CONVERGE");
    return 0;
}

int run_diagnose_cmd(const CommonArgs& args) {
    const Config cfg = load_config(args);
    const std::vector<double> ks = k_sweep(cfg);
    const std::vector<int> approaches = approach_list(cfg, "1");
    const int spectrum_approach = approaches.front();
    if (spectrum_approach > 3)
        throw ConfigError("spectra exist for the sandwiched approaches 1-3");
    const QuadConfig quad = quadrature_config(cfg);

    OperatorParts parts = parts_for_approaches({spectrum_approach});
    parts.system_hdiv = parts.system_l2 = true;

    std::ofstream scaling = open_csv(cfg, "scaling.csv");
    std::ofstream gram = open_csv(cfg, "gram_cond.csv");
    std::ofstream spectrum = open_csv(cfg, "spectrum.csv");
    scaling << "block,k,h,max_entry\n";
    gram << "matrix,k,cond\n";
    spectrum << "re,im\n";
    scaling << std::setprecision(12);
    gram << std::setprecision(12);
    spectrum << std::setprecision(12);

    std::map<std::string, std::vector<double>> samples;
    bool spectrum_written = false;
    for (double k : ks) {
        const double c = divergence_weight(cfg, k);
        OperatorSet set = build_operator_set(make_scatterer(cfg), k, c, parts, quad);
        const double h = mesh_h(*set.base);
        LoopStar edge_ls = loop_star_edge(*set.base, set.edges.edge_flux);
        LoopStar dual_ls = loop_star_dual(*set.base, set.duals.transfer);

        const BlockMagnitudes l2 =
            block_magnitudes(*set.matrices.system_l2, edge_ls, edge_ls);
        const BlockMagnitudes hd =
            block_magnitudes(*set.matrices.system_hdiv, dual_ls, edge_ls);
        const VectorBlockMagnitudes rl =
            vector_block_magnitudes(set.matrices.rhs_l2, edge_ls);
        const VectorBlockMagnitudes rh =
            vector_block_magnitudes(set.matrices.rhs_hdiv, dual_ls);
        const std::vector<std::pair<std::string, double>> blocks = {
            {"l2_LL", l2.LL},     {"l2_LS", l2.LS},     {"l2_SL", l2.SL},
            {"l2_SS", l2.SS},     {"hdiv_LL", hd.LL},   {"hdiv_LS", hd.LS},
            {"hdiv_SL", hd.SL},   {"hdiv_SS", hd.SS},   {"rhs_l2_L", rl.L},
            {"rhs_l2_S", rl.S},   {"rhs_hdiv_L", rh.L}, {"rhs_hdiv_S", rh.S}};
        for (const auto& [name, value] : blocks) {
            scaling << name << ',' << k << ',' << h << ',' << value << '\n';
            samples[name].push_back(value);
        }

        const std::vector<std::pair<std::string, const Eigen::MatrixXcd*>> grams = {
            {gram_label_dual_edge(), set.matrices.gram_dual_edge.get()},
            {gram_label_edge_dual(), set.matrices.gram_edge_dual.get()},
            {gram_label_dual(), set.matrices.gram_dual.get()},
            {gram_label_hdiv_edge(), set.matrices.gram_hdiv_edge.get()},
            {gram_label_hdiv_dual(), set.matrices.gram_hdiv_dual.get()}};
        for (const auto& [name, M] : grams)
            if (M) gram << name << ',' << k << ',' << condition_number(M->real())
                        << '\n';

        if (!spectrum_written) {
            const Eigen::VectorXcd eigs =
                preconditioned_spectrum(spectrum_approach, set.matrices);
            for (Eigen::Index i = 0; i < eigs.size(); ++i)
                spectrum << eigs(i).real() << ',' << eigs(i).imag() << '\n';
            const std::vector<cplx> centers =
                spectrum_approach == 3
                    ? std::vector<cplx>{cplx(-0.25, 0.0)}
                    : std::vector<cplx>{cplx(0.25, 0.0), cplx(-0.25, 0.0)};
            for (double r : {0.10, 0.15, 0.25})
                std::printf("spectrum approach %d k %g: fraction within %.2f of "
                            "centers = %.4f\n",
                            spectrum_approach, k, r,
                            cluster_fraction(eigs, centers, r));
            spectrum_written = true;
        }
    }

    if (ks.size() >= 2)
        for (const auto& [name, values] : samples) {
            const LineFit fit = loglog_fit(ks, values);
            std::printf("fit %-10s k-exponent %+.3f  r2 %.4f%s\n", name.c_str(),
                        fit.slope, fit.r2, fit.r2 > 0.95 ? "" : "  (unreliable)");
        }
    return 0;
}

int run_mesh_info_cmd(const CommonArgs& args) {
    const Config cfg = load_config(args);
    const Mesh m = make_scatterer(cfg);
    double rmin = 1e300, rmax = 0.0;
    for (const Vec3& v : m.vertices) {
        rmin = std::min(rmin, v.norm());
        rmax = std::max(rmax, v.norm());
    }
    std::printf("vertices  %d\n", m.num_vertices());
    std::printf("edges     %d\n", m.num_edges());
    std::printf("triangles %d\n", m.num_triangles());
    std::printf("euler     %d\n", m.euler_characteristic());
    std::printf("h         %.6g\n", mesh_h(m));
    std::printf("area      %.6g\n", mesh_area(m));
    std::printf("|x| range [%.6g, %.6g]\n", rmin, rmax);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dense boundary-element solver for PEC scattering"};
    app.require_subcommand(1);

    CommonArgs sweep_args, diag_args, info_args;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "solve across frequencies and write results.csv");
    add_common(sweep, sweep_args);
    CLI::App* diagnose = app.add_subcommand(
        "diagnose", "write scaling.csv, gram_cond.csv, spectrum.csv");
    add_common(diagnose, diag_args);
    CLI::App* info = app.add_subcommand("mesh-info", "print mesh statistics");
    add_common(info, info_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) return run_sweep_cmd(sweep_args);
        if (diagnose->parsed()) return run_diagnose_cmd(diag_args);
        if (info->parsed()) return run_mesh_info_cmd(info_args);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "efie: %s\n", e.what());
        return 2;
    }
    return 1;
}
