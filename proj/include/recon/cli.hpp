#pragma once

// Experiment configuration, drivers, and output writers behind the `recon`
// command-line tool. Every driver returns an in-memory result and, through
// the cmd_* wrappers, writes:
//   <name>.f32 / <name>.f32.txt   canonical rasters (see io.hpp)
//   <name>.pgm                    8-bit viewable rasters
//   metrics.csv                   metrics table
//   manifest.json                 config echo, seeds, library version

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "recon/recon.hpp"
#include "recon/io.hpp"

namespace recon::cli {

using json = nlohmann::ordered_json;

/// Malformed configuration; `field()` is the dotted path of the offending key.
class ConfigError : public ValidationError {
public:
    ConfigError(std::string field, const std::string& message)
        : ValidationError("config field '" + field + "': " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// ---------------------------------------------------------------------------
// Configuration

struct PhantomSpec {
    std::string kind = "shepp_logan"; // shepp_logan | disk
    std::size_t size = 128;
    bool operator==(const PhantomSpec&) const = default;
};

struct DegradationSpec {
    std::string modality = "blur_mask"; // blur_mask | ct
    std::size_t blur_size = 5;
    double blur_sigma = 1.0;
    double keep_fraction = 0.5;
    double snr_db = 20.0; // measurement SNR; inf for noiseless
    bool operator==(const DegradationSpec&) const = default;
};

struct GeometrySpec {
    std::size_t n_angles = 180;
    std::size_t n_detectors = 0; // 0: one per image column
    std::string apodization = "none"; // none | cosine
    bool operator==(const GeometrySpec&) const = default;
};

struct SolverSpec {
    std::string name = "admm_tv"; // admm_tv | cg_tikhonov | gd_tikhonov | fbp
    double lambda = 0.01;
    std::vector<double> lambdas;    // sweep for the sparse (TV) reconstruction
    std::vector<double> lambdas_l2; // sweep for the Tikhonov reconstruction
    double rho = 1.0;
    double step = 0.0; // gd_tikhonov step; 0: automatic 0.9 / Lipschitz
    std::size_t max_iter = 300;
    double tol = 1e-4;
    std::size_t inner_iter = 30;
    bool operator==(const SolverSpec&) const = default;
};

struct StudySpec {
    std::vector<std::string> transforms{"haar", "dct8", "dft"};
    std::vector<double> keep_fractions{0.005, 0.01, 0.05};
    bool operator==(const StudySpec&) const = default;
};

struct ExperimentConfig {
    std::string experiment = "reconstruct";
    PhantomSpec phantom;
    DegradationSpec degradation;
    GeometrySpec geometry;
    SolverSpec solver;
    StudySpec study;
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    bool operator==(const ExperimentConfig&) const = default;

    /// Derived seeds: every random draw in a run uses one of these.
    Seed mask_seed() const { return {seed}; }
    Seed noise_seed() const { return {seed + 1}; }
};

inline const std::uint64_t power_iteration_seed = 0x5eed;

namespace detail {

// JSON numbers cannot hold infinities; the text form uses the string "inf".
inline json number_to_json(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline double number_from_json(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw ConfigError(path, "expected a number");
}

class Reader {
public:
    Reader(const json& obj, std::string prefix, std::set<std::string> allowed)
        : obj_(obj), prefix_(std::move(prefix)) {
        if (!obj.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
        for (const auto& [key, value] : obj.items())
            if (!allowed.count(key)) throw ConfigError(path(key), "unknown field");
    }

    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    bool has(const std::string& key) const { return obj_.contains(key); }
    const json& at(const std::string& key) const { return obj_.at(key); }

    void read(const std::string& key, std::string& out) const {
        if (!has(key)) return;
        if (!at(key).is_string()) throw ConfigError(path(key), "expected a string");
        out = at(key).get<std::string>();
    }
    void read(const std::string& key, double& out) const {
        if (has(key)) out = number_from_json(at(key), path(key));
    }
    void read(const std::string& key, std::size_t& out) const {
        if (!has(key)) return;
        if (!at(key).is_number_unsigned()) throw ConfigError(path(key), "expected a non-negative integer");
        out = at(key).get<std::size_t>();
    }
    void read(const std::string& key, std::uint64_t& out, int /*seed tag*/) const {
        if (!has(key)) return;
        if (!at(key).is_number_unsigned()) throw ConfigError(path(key), "expected a non-negative integer");
        out = at(key).get<std::uint64_t>();
    }
    void read(const std::string& key, std::vector<double>& out) const {
        if (!has(key)) return;
        if (!at(key).is_array()) throw ConfigError(path(key), "expected an array of numbers");
        out.clear();
        for (std::size_t i = 0; i < at(key).size(); ++i)
            out.push_back(number_from_json(at(key)[i], path(key) + "[" + std::to_string(i) + "]"));
    }
    void read(const std::string& key, std::vector<std::string>& out) const {
        if (!has(key)) return;
        if (!at(key).is_array()) throw ConfigError(path(key), "expected an array of strings");
        out.clear();
        for (std::size_t i = 0; i < at(key).size(); ++i) {
            if (!at(key)[i].is_string())
                throw ConfigError(path(key) + "[" + std::to_string(i) + "]", "expected a string");
            out.push_back(at(key)[i].get<std::string>());
        }
    }

private:
    const json& obj_;
    std::string prefix_;
};

inline json numbers(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(number_to_json(x));
    return out;
}

} // namespace detail

inline json to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = c.experiment;
    j["phantom"] = {{"kind", c.phantom.kind}, {"size", c.phantom.size}};
    j["degradation"] = {{"modality", c.degradation.modality},
                        {"blur_size", c.degradation.blur_size},
                        {"blur_sigma", c.degradation.blur_sigma},
                        {"keep_fraction", c.degradation.keep_fraction},
                        {"snr_db", detail::number_to_json(c.degradation.snr_db)}};
    j["geometry"] = {{"n_angles", c.geometry.n_angles},
                     {"n_detectors", c.geometry.n_detectors},
                     {"apodization", c.geometry.apodization}};
    j["solver"] = {{"name", c.solver.name},
                   {"lambda", c.solver.lambda},
                   {"lambdas", detail::numbers(c.solver.lambdas)},
                   {"lambdas_l2", detail::numbers(c.solver.lambdas_l2)},
                   {"rho", c.solver.rho},
                   {"step", c.solver.step},
                   {"max_iter", c.solver.max_iter},
                   {"tol", c.solver.tol},
                   {"inner_iter", c.solver.inner_iter}};
    j["study"] = {{"transforms", c.study.transforms}, {"keep_fractions", detail::numbers(c.study.keep_fractions)}};
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    return j;
}

inline void validate(const ExperimentConfig& c) {
    static const std::set<std::string> experiments{"phantom",       "simulate",       "reconstruct",
                                                   "compress_study", "compare_l2_l1", "fbp_vs_tv",
                                                   "nullspace_demo"};
    if (!experiments.count(c.experiment)) throw ConfigError("experiment", "unknown experiment '" + c.experiment + "'");
    if (c.phantom.kind != "shepp_logan" && c.phantom.kind != "disk")
        throw ConfigError("phantom.kind", "must be shepp_logan or disk");
    if (c.phantom.size < 32) throw ConfigError("phantom.size", "must be at least 32");
    if (c.degradation.modality != "blur_mask" && c.degradation.modality != "ct")
        throw ConfigError("degradation.modality", "must be blur_mask or ct");
    if (c.degradation.blur_size % 2 == 0 || c.degradation.blur_size > c.phantom.size)
        throw ConfigError("degradation.blur_size", "must be odd and no larger than the image");
    if (!(c.degradation.blur_sigma > 0.0)) throw ConfigError("degradation.blur_sigma", "must be positive");
    if (!(c.degradation.keep_fraction > 0.0 && c.degradation.keep_fraction <= 1.0))
        throw ConfigError("degradation.keep_fraction", "must be in (0, 1]");
    if (std::isnan(c.degradation.snr_db)) throw ConfigError("degradation.snr_db", "must be a number");
    if (c.geometry.n_angles < 1) throw ConfigError("geometry.n_angles", "must be at least 1");
    if (c.geometry.apodization != "none" && c.geometry.apodization != "cosine")
        throw ConfigError("geometry.apodization", "must be none or cosine");
    static const std::set<std::string> solvers{"admm_tv", "cg_tikhonov", "gd_tikhonov", "fbp"};
    if (!solvers.count(c.solver.name)) throw ConfigError("solver.name", "unknown solver '" + c.solver.name + "'");
    if (!(c.solver.lambda >= 0.0 && std::isfinite(c.solver.lambda)))
        throw ConfigError("solver.lambda", "must be finite and >= 0");
    for (std::size_t i = 0; i < c.solver.lambdas.size(); ++i)
        if (!(c.solver.lambdas[i] >= 0.0 && std::isfinite(c.solver.lambdas[i])))
            throw ConfigError("solver.lambdas[" + std::to_string(i) + "]", "must be finite and >= 0");
    for (std::size_t i = 0; i < c.solver.lambdas_l2.size(); ++i)
        if (!(c.solver.lambdas_l2[i] >= 0.0 && std::isfinite(c.solver.lambdas_l2[i])))
            throw ConfigError("solver.lambdas_l2[" + std::to_string(i) + "]", "must be finite and >= 0");
    if (!(c.solver.rho > 0.0 && std::isfinite(c.solver.rho))) throw ConfigError("solver.rho", "must be positive");
    if (!(c.solver.step >= 0.0 && std::isfinite(c.solver.step)))
        throw ConfigError("solver.step", "must be finite and >= 0");
    if (c.solver.max_iter < 1) throw ConfigError("solver.max_iter", "must be at least 1");
    if (!(c.solver.tol >= 0.0)) throw ConfigError("solver.tol", "must be >= 0");
    for (std::size_t i = 0; i < c.study.transforms.size(); ++i) {
        const auto& t = c.study.transforms[i];
        if (t != "haar" && t != "dct8" && t != "dft")
            throw ConfigError("study.transforms[" + std::to_string(i) + "]", "must be haar, dct8 or dft");
    }
    for (std::size_t i = 0; i < c.study.keep_fractions.size(); ++i)
        if (!(c.study.keep_fractions[i] >= 0.0 && c.study.keep_fractions[i] <= 1.0))
            throw ConfigError("study.keep_fractions[" + std::to_string(i) + "]", "must be in [0, 1]");
}

inline ExperimentConfig from_json(const json& j) {
    using detail::Reader;
    ExperimentConfig c;
    const Reader root(j, "", {"experiment", "phantom", "degradation", "geometry", "solver", "study", "seed",
                              "output_dir"});
    root.read("experiment", c.experiment);
    if (root.has("phantom")) {
        const Reader r(j.at("phantom"), "phantom", {"kind", "size"});
        r.read("kind", c.phantom.kind);
        r.read("size", c.phantom.size);
    }
    if (root.has("degradation")) {
        const Reader r(j.at("degradation"), "degradation",
                       {"modality", "blur_size", "blur_sigma", "keep_fraction", "snr_db"});
        r.read("modality", c.degradation.modality);
        r.read("blur_size", c.degradation.blur_size);
        r.read("blur_sigma", c.degradation.blur_sigma);
        r.read("keep_fraction", c.degradation.keep_fraction);
        r.read("snr_db", c.degradation.snr_db);
    }
    if (root.has("geometry")) {
        const Reader r(j.at("geometry"), "geometry", {"n_angles", "n_detectors", "apodization"});
        r.read("n_angles", c.geometry.n_angles);
        r.read("n_detectors", c.geometry.n_detectors);
        r.read("apodization", c.geometry.apodization);
    }
    if (root.has("solver")) {
        const Reader r(j.at("solver"), "solver",
                       {"name", "lambda", "lambdas", "lambdas_l2", "rho", "step", "max_iter", "tol", "inner_iter"});
        r.read("name", c.solver.name);
        r.read("lambda", c.solver.lambda);
        r.read("lambdas", c.solver.lambdas);
        r.read("lambdas_l2", c.solver.lambdas_l2);
        r.read("rho", c.solver.rho);
        r.read("step", c.solver.step);
        r.read("max_iter", c.solver.max_iter);
        r.read("tol", c.solver.tol);
        r.read("inner_iter", c.solver.inner_iter);
    }
    if (root.has("study")) {
        const Reader r(j.at("study"), "study", {"transforms", "keep_fractions"});
        r.read("transforms", c.study.transforms);
        r.read("keep_fractions", c.study.keep_fractions);
    }
    root.read("seed", c.seed, 0);
    root.read("output_dir", c.output_dir);
    validate(c);
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("not valid JSON: ") + e.what());
    }
    return from_json(j);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

inline std::string dump_config(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

/// Defaults for each experiment; these are the shipped benchmark settings.
inline ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    if (experiment == "compare_l2_l1") {
        c.phantom.size = 128;
        c.degradation = {"blur_mask", 5, 1.0, 0.5, 20.0};
        c.solver.name = "admm_tv";
        c.solver.lambdas = {1e-3, 3e-3, 1e-2, 3e-2};
        c.solver.lambdas_l2 = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1};
        c.solver.max_iter = 200;
        c.solver.tol = 5e-3;
    } else if (experiment == "fbp_vs_tv") {
        c.phantom.size = 128;
        c.degradation.modality = "ct";
        c.degradation.snr_db = 40.0;
        c.geometry.n_angles = 30;
        c.solver.name = "admm_tv";
        c.solver.lambdas = {3e-4, 1e-3, 3e-3};
        c.solver.max_iter = 100;
        c.solver.inner_iter = 10;
        c.solver.tol = 1e-2;
    } else if (experiment == "compress_study") {
        c.phantom.size = 256;
    } else if (experiment == "simulate" || experiment == "reconstruct") {
        c.phantom.size = 128;
    }
    validate(c);
    return c;
}

// ---------------------------------------------------------------------------
// Shared pieces

inline GridImage make_phantom(const PhantomSpec& spec) {
    if (spec.kind == "disk") return render(EllipsePhantom{{{0.0, 0.0, 0.6, 0.6, 0.0, 1.0}}}, spec.size);
    return shepp_logan(spec.size);
}

inline EllipsePhantom phantom_ellipses(const PhantomSpec& spec) {
    if (spec.kind == "disk") return EllipsePhantom{{{0.0, 0.0, 0.6, 0.6, 0.0, 1.0}}};
    return shepp_logan_phantom();
}

inline RadonGeometry make_geometry(const ExperimentConfig& c) {
    const std::size_t n = c.phantom.size;
    const std::size_t detectors = c.geometry.n_detectors ? c.geometry.n_detectors : n;
    return {c.geometry.n_angles, detectors, 2.0 / static_cast<double>(n)};
}

/// Simulated measurements for either modality.
struct Simulation {
    GridImage truth;
    LinearMap forward;
    Vec measurements;
    double sigma = 0.0;
    double measurement_snr = 0.0;
    std::optional<Mask> mask;           // blur_mask only
    std::optional<RadonGeometry> geometry; // ct only
};

inline Simulation simulate(const ExperimentConfig& c) {
    validate(c);
    GridImage truth = make_phantom(c.phantom);
    const std::size_t n = truth.width();
    const bool noisy = std::isfinite(c.degradation.snr_db);
    if (c.degradation.modality == "ct") {
        const RadonGeometry geom = make_geometry(c);
        Sinogram sino = analytic_sinogram(phantom_ellipses(c.phantom), geom);
        const double sigma = noisy ? sigma_for_snr(sino.data, c.degradation.snr_db) : 0.0;
        if (sigma > 0.0) {
            const GridImage noise = gaussian_noise(geom.n_detectors, geom.n_angles, sigma, c.noise_seed());
            for (std::size_t i = 0; i < sino.data.size(); ++i) sino.data[i] += noise.data()[i];
        }
        Simulation sim{std::move(truth), op_radon(geom, n, n, 2.0 / static_cast<double>(n)), std::move(sino.data),
                       sigma, noisy ? c.degradation.snr_db : std::numeric_limits<double>::infinity(),
                       std::nullopt, geom};
        return sim;
    }
    const GridImage blur = gaussian_kernel(c.degradation.blur_size, c.degradation.blur_sigma);
    const Mask mask = Mask::random(n, n, c.degradation.keep_fraction, c.mask_seed());
    const Degradation clean = degrade(truth, blur, mask, 0.0, c.noise_seed());
    const double sigma = noisy ? sigma_for_snr(clean.clean, c.degradation.snr_db) : 0.0;
    Degradation d = degrade(truth, blur, mask, sigma, c.noise_seed());
    const double snr = d.measurement_snr_db();
    return {std::move(truth), d.forward, std::move(d.measurements), sigma, snr, mask, std::nullopt};
}

/// Measurements scattered back onto the image grid (zeros where unsampled).
inline GridImage measurement_image(const Simulation& sim) {
    if (sim.geometry) {
        return GridImage(sim.geometry->n_detectors, sim.geometry->n_angles, sim.measurements);
    }
    const Vec filled = op_mask(*sim.mask).adjoint(sim.measurements);
    return GridImage(sim.truth.width(), sim.truth.height(), filled, sim.truth.pitch());
}

inline AdmmOptions admm_options(const SolverSpec& s) {
    AdmmOptions o;
    o.rho = s.rho;
    o.max_iter = s.max_iter;
    o.tol_primal = s.tol;
    o.tol_dual = s.tol;
    o.inner_max_iter = s.inner_iter;
    return o;
}

inline SolveReport solve_tv(const Simulation& sim, double lambda, const SolverSpec& s) {
    const std::size_t n = sim.truth.width();
    Objective obj{sim.forward, sim.measurements, op_grad(n, n), Penalty::abs, lambda};
    return admm(obj, Vec(n * n, 0.0), admm_options(s));
}

inline SolveReport solve_tikhonov(const Simulation& sim, double lambda, const SolverSpec& s) {
    const std::size_t n = sim.truth.width();
    Objective obj{sim.forward, sim.measurements, op_grad(n, n), Penalty::quadratic, lambda};
    return conjugate_gradient_normal(obj, Vec(n * n, 0.0), std::max<std::size_t>(s.max_iter, 500), 1e-8);
}

inline GridImage with_pitch(const GridImage& img, double pitch) {
    return GridImage(img.width(), img.height(), img.values(), pitch);
}

// ---------------------------------------------------------------------------
// Output

class RunWriter {
public:
    RunWriter(const ExperimentConfig& config, std::string command)
        : dir_(config.output_dir), config_(config), command_(std::move(command)) {
        std::filesystem::create_directories(dir_);
    }

    const std::filesystem::path& dir() const noexcept { return dir_; }

    void image(const std::string& name, const GridImage& img) {
        io::write_f32(dir_ / (name + ".f32"), img);
        io::write_pgm(dir_ / (name + ".pgm"), img);
        files_.push_back(name + ".f32");
        files_.push_back(name + ".pgm");
    }

    void table(const std::string& file, const io::Table& t) {
        t.write(dir_ / file);
        files_.push_back(file);
    }

    void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }

    void manifest() {
        json m;
        m["command"] = command_;
        m["library_version"] = RECON_VERSION;
        m["config"] = to_json(config_);
        json seeds = json::object();
        for (const auto& [k, v] : seeds_) seeds[k] = v;
        m["seeds"] = seeds;
        m["prng"] = "SplitMix64 + Box-Muller";
        m["files"] = files_;
        std::ofstream out(dir_ / "manifest.json");
        out << m.dump(2) << "\n";
    }

private:
    std::filesystem::path dir_;
    ExperimentConfig config_;
    std::string command_;
    std::map<std::string, std::uint64_t> seeds_;
    std::vector<std::string> files_;
};

inline void record_simulation_seeds(RunWriter& w, const ExperimentConfig& c) {
    if (c.degradation.modality == "blur_mask") w.seed("mask_seed", c.mask_seed().value);
    if (std::isfinite(c.degradation.snr_db)) w.seed("noise_seed", c.noise_seed().value);
}

inline io::Table trace_table(const SolveReport& rep) {
    io::Table t({"iteration", "objective", "residual"});
    for (std::size_t i = 0; i < rep.objective_trace.size(); ++i)
        t.add_row({std::to_string(i + 1), io::format_number(rep.objective_trace[i]),
                   io::format_number(rep.residual_trace[i])});
    return t;
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_phantom(const ExperimentConfig& c, std::ostream& log) {
    RunWriter w(c, "phantom");
    const GridImage img = make_phantom(c.phantom);
    w.image("phantom", img);
    const auto [lo, hi] = io::min_max(img.data());
    io::Table t({"metric", "value"});
    t.add_row({"width", std::to_string(img.width())});
    t.add_row({"height", std::to_string(img.height())});
    t.add_row({"min", io::format_number(lo)});
    t.add_row({"max", io::format_number(hi)});
    w.table("metrics.csv", t);
    w.manifest();
    log << "wrote " << c.phantom.kind << " phantom " << img.width() << "x" << img.height() << " to " << w.dir().string()
        << "\n";
    return 0;
}

inline int cmd_simulate(const ExperimentConfig& c, std::ostream& log) {
    RunWriter w(c, "simulate");
    const Simulation sim = simulate(c);
    w.image("truth", sim.truth);
    w.image(sim.geometry ? "sinogram" : "measurements", measurement_image(sim));
    record_simulation_seeds(w, c);
    io::Table t({"metric", "value"});
    t.add_row({"modality", c.degradation.modality});
    t.add_row({"measurements", std::to_string(sim.measurements.size())});
    t.add_row({"noise_sigma", io::format_number(sim.sigma)});
    t.add_row({"measurement_snr_db", io::format_number(sim.measurement_snr)});
    w.table("metrics.csv", t);
    w.manifest();
    log << "simulated " << sim.measurements.size() << " measurements, SNR " << io::format_number(sim.measurement_snr)
        << " dB\n";
    return 0;
}

struct ReconstructResult {
    GridImage reconstruction;
    double snr = 0.0;
    std::optional<SolveReport> report;
};

inline ReconstructResult run_reconstruct(const ExperimentConfig& c) {
    const Simulation sim = simulate(c);
    const std::size_t n = sim.truth.width();
    const double pitch = sim.truth.pitch();
    ReconstructResult out;
    if (c.solver.name == "fbp") {
        if (!sim.geometry) throw ConfigError("solver.name", "fbp requires degradation.modality = ct");
        const Sinogram sino = Sinogram::from(*sim.geometry, sim.measurements);
        const RampFilter filter = RampFilter::make(
            sino.n_detectors, sino.detector_pitch,
            c.geometry.apodization == "cosine" ? Apodization::cosine : Apodization::none);
        out.reconstruction = fbp(sino, filter, n, n, pitch);
    } else {
        SolveReport rep;
        if (c.solver.name == "admm_tv") {
            rep = solve_tv(sim, c.solver.lambda, c.solver);
        } else if (c.solver.name == "cg_tikhonov") {
            rep = solve_tikhonov(sim, c.solver.lambda, c.solver);
        } else {
            Objective obj{sim.forward, sim.measurements, op_grad(n, n), Penalty::quadratic, c.solver.lambda};
            const StepRule step = c.solver.step > 0.0 ? StepRule::fixed(c.solver.step) : StepRule::automatic_rule();
            rep = gradient_descent(obj, Vec(n * n, 0.0), step, c.solver.max_iter, c.solver.tol);
        }
        out.reconstruction = with_pitch(rep.final, pitch);
        out.report = std::move(rep);
    }
    out.snr = snr_db(sim.truth, out.reconstruction);
    return out;
}

inline int cmd_reconstruct(const ExperimentConfig& c, std::ostream& log) {
    RunWriter w(c, "reconstruct");
    const ReconstructResult r = run_reconstruct(c);
    w.image("reconstruction", r.reconstruction);
    record_simulation_seeds(w, c);
    io::Table t({"metric", "value"});
    t.add_row({"solver", c.solver.name});
    t.add_row({"lambda", io::format_number(c.solver.lambda)});
    t.add_row({"snr_db", io::format_number(r.snr)});
    if (r.report) {
        w.seed("power_iteration_seed", power_iteration_seed);
        t.add_row({"iterations", std::to_string(r.report->iterations)});
        t.add_row({"converged", r.report->converged ? "true" : "false"});
        t.add_row({"final_objective", io::format_number(r.report->objective_trace.empty()
                                                            ? 0.0
                                                            : r.report->objective_trace.back())});
        w.table("trace.csv", trace_table(*r.report));
    }
    w.table("metrics.csv", t);
    w.manifest();
    log << c.solver.name << ": SNR " << io::format_number(r.snr) << " dB\n";
    return 0;
}

struct StudyResult {
    std::vector<std::pair<SparsifyingTransform, std::vector<CompressionRow>>> tables;
};

inline SparsifyingTransform parse_transform(const std::string& name) {
    if (name == "haar") return SparsifyingTransform::haar;
    if (name == "dct8") return SparsifyingTransform::dct8;
    return SparsifyingTransform::dft;
}

inline StudyResult run_compress_study(const ExperimentConfig& c) {
    validate(c);
    if (c.study.keep_fractions.empty()) throw ConfigError("study.keep_fractions", "must not be empty");
    const GridImage img = make_phantom(c.phantom);
    StudyResult r;
    for (const auto& name : c.study.transforms) {
        const SparsifyingTransform t = parse_transform(name);
        r.tables.emplace_back(t, compressibility_study(img, t, c.study.keep_fractions));
    }
    return r;
}

inline int cmd_compress_study(const ExperimentConfig& c, std::ostream& log) {
    RunWriter w(c, "compress_study");
    const StudyResult r = run_compress_study(c);
    w.image("phantom", make_phantom(c.phantom));
    io::Table t({"transform", "keep_fraction", "kept", "retained_energy", "discarded_energy", "snr_db"});
    for (const auto& [transform, rows] : r.tables)
        for (const CompressionRow& row : rows) {
            t.add_row({to_string(transform), io::format_number(row.keep_fraction), std::to_string(row.kept),
                       io::format_number(row.retained_energy), io::format_number(row.discarded_energy),
                       io::format_number(row.snr_db)});
            char name[64];
            std::snprintf(name, sizeof name, "%s_keep_%g", to_string(transform).c_str(), row.keep_fraction * 100.0);
            w.image(name, with_pitch(row.reconstruction, 2.0 / static_cast<double>(c.phantom.size)));
        }
    w.table("metrics.csv", t);
    w.manifest();
    log << t.str();
    return 0;
}

struct CompareResult {
    SweepTable l2;
    SweepTable l1;
    GridImage truth;
    GridImage l2_best;
    GridImage l1_best;
    GridImage measurements;
    double measurement_snr = 0.0;
    std::vector<double> tv_primal; // final |Lf - u| per lambda
};

inline CompareResult run_compare_l2_l1(const ExperimentConfig& c) {
    validate(c);
    if (c.solver.lambdas.empty()) throw ConfigError("solver.lambdas", "must not be empty");
    if (c.solver.lambdas_l2.empty()) throw ConfigError("solver.lambdas_l2", "must not be empty");
    ExperimentConfig cfg = c;
    cfg.degradation.modality = "blur_mask";
    const Simulation sim = simulate(cfg);
    const double pitch = sim.truth.pitch();
    CompareResult r;
    std::map<double, GridImage> l2_images;
    std::map<double, GridImage> l1_images;
    r.l2 = lambda_sweep(
        c.solver.lambdas_l2,
        [&](double lambda) { return l2_images[lambda] = with_pitch(solve_tikhonov(sim, lambda, c.solver).final, pitch); },
        sim.truth);
    r.l1 = lambda_sweep(
        c.solver.lambdas,
        [&](double lambda) {
            const SolveReport rep = solve_tv(sim, lambda, c.solver);
            r.tv_primal.push_back(rep.residual_trace.back());
            return l1_images[lambda] = with_pitch(rep.final, pitch);
        },
        sim.truth);
    r.l2_best = l2_images.at(r.l2.best_lambda());
    r.l1_best = l1_images.at(r.l1.best_lambda());
    r.measurements = measurement_image(sim);
    r.truth = sim.truth;
    r.measurement_snr = sim.measurement_snr;
    return r;
}

inline io::Table sweep_table(const std::string& method, const SweepTable& s, io::Table t) {
    for (const SweepRow& row : s.rows) t.add_row({method, io::format_number(row.lambda), io::format_number(row.metric)});
    return t;
}

inline int cmd_compare_l2_l1(const ExperimentConfig& c, std::ostream& log) {
    RunWriter w(c, "compare_l2_l1");
    const CompareResult r = run_compare_l2_l1(c);
    w.image("truth", r.truth);
    w.image("measurements", r.measurements);
    w.image("l2_tikhonov", r.l2_best);
    w.image("l1_tv", r.l1_best);
    record_simulation_seeds(w, c);
    w.seed("power_iteration_seed", power_iteration_seed);
    io::Table sweep({"method", "lambda", "snr_db"});
    sweep = sweep_table("tikhonov_cg", r.l2, sweep);
    sweep = sweep_table("tv_admm", r.l1, sweep);
    w.table("sweep.csv", sweep);
    io::Table t({"method", "best_lambda", "snr_db"});
    t.add_row({"tikhonov_cg", io::format_number(r.l2.best_lambda()), io::format_number(r.l2.best_metric())});
    t.add_row({"tv_admm", io::format_number(r.l1.best_lambda()), io::format_number(r.l1.best_metric())});
    w.table("metrics.csv", t);
    w.manifest();
    log << "measurement SNR " << io::format_number(r.measurement_snr) << " dB\n"
        << "l2 (Tikhonov, CG): " << io::format_number(r.l2.best_metric()) << " dB at lambda "
        << io::format_number(r.l2.best_lambda()) << "\n"
        << "l1 (TV, ADMM):     " << io::format_number(r.l1.best_metric()) << " dB at lambda "
        << io::format_number(r.l1.best_lambda()) << "\n";
    return 0;
}

struct FbpTvResult {
    GridImage truth;
    GridImage fbp_image;
    GridImage tv_image;
    double fbp_snr = 0.0;
    SweepTable tv;
    std::vector<double> tv_primal;
};

inline FbpTvResult run_fbp_vs_tv(const ExperimentConfig& c) {
    validate(c);
    if (c.solver.lambdas.empty()) throw ConfigError("solver.lambdas", "must not be empty");
    ExperimentConfig cfg = c;
    cfg.degradation.modality = "ct";
    const Simulation sim = simulate(cfg);
    const std::size_t n = sim.truth.width();
    const double pitch = sim.truth.pitch();
    FbpTvResult r;
    r.truth = sim.truth;
    const Sinogram sino = Sinogram::from(*sim.geometry, sim.measurements);
    r.fbp_image = fbp(sino,
                      RampFilter::make(sino.n_detectors, sino.detector_pitch,
                                       c.geometry.apodization == "cosine" ? Apodization::cosine : Apodization::none),
                      n, n, pitch);
    r.fbp_snr = snr_db(sim.truth, r.fbp_image);
    std::map<double, GridImage> images;
    r.tv = lambda_sweep(
        c.solver.lambdas,
        [&](double lambda) {
            const SolveReport rep = solve_tv(sim, lambda, c.solver);
            r.tv_primal.push_back(rep.residual_trace.back());
            return images[lambda] = with_pitch(rep.final, pitch);
        },
        sim.truth);
    r.tv_image = images.at(r.tv.best_lambda());
    return r;
}

inline int cmd_fbp_vs_tv(const ExperimentConfig& c, std::ostream& log) {
    RunWriter w(c, "fbp_vs_tv");
    const FbpTvResult r = run_fbp_vs_tv(c);
    w.image("truth", r.truth);
    w.image("fbp", r.fbp_image);
    w.image("tv_admm", r.tv_image);
    record_simulation_seeds(w, c);
    w.seed("power_iteration_seed", power_iteration_seed);
    w.table("sweep.csv", sweep_table("tv_admm", r.tv, io::Table({"method", "lambda", "snr_db"})));
    io::Table t({"method", "lambda", "snr_db"});
    t.add_row({"fbp", "", io::format_number(r.fbp_snr)});
    t.add_row({"tv_admm", io::format_number(r.tv.best_lambda()), io::format_number(r.tv.best_metric())});
    w.table("metrics.csv", t);
    w.manifest();
    log << "FBP:     " << io::format_number(r.fbp_snr) << " dB\n"
        << "TV-ADMM: " << io::format_number(r.tv.best_metric()) << " dB at lambda "
        << io::format_number(r.tv.best_lambda()) << "\n";
    return 0;
}

inline io::Table nullspace_table(const NullspaceDemo& demo) {
    io::Table t({"f0", "solution", "sse"});
    auto vec3 = [](const std::array<double, 3>& v) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "(%.2f %.2f %.2f)", v[0], v[1], v[2]);
        return std::string(buf);
    };
    for (const NullspaceRow& row : demo.rows) {
        char sse[32];
        std::snprintf(sse, sizeof sse, "%.4f", row.sse);
        t.add_row({vec3(row.f0), vec3(row.solution), sse});
    }
    return t;
}

/// Prints the three CG solutions; writes metrics.csv and a manifest when
/// `out` is set.
inline int cmd_nullspace_demo(std::ostream& log, const std::optional<ExperimentConfig>& out = std::nullopt) {
    const NullspaceDemo demo = nullspace_demo();
    const io::Table t = nullspace_table(demo);
    log << "H = [[1 0 1] [0 1 -1] [1 1 0]], g = (3 -1 2.1), null space spanned by (1 -1 -1)\n" << t.str();
    if (out) {
        RunWriter w(*out, "nullspace_demo");
        w.table("metrics.csv", t);
        w.manifest();
    }
    return 0;
}

/// Quick battery over the main code paths; one PASS/FAIL line per check.
inline int cmd_selftest(std::ostream& log) {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok, const std::string& detail) {
        log << (ok ? "PASS " : "FAIL ") << name << "  " << detail << "\n";
        if (!ok) ++failures;
    };
    SplitMix64 rng(Seed{99});
    {
        const GridImage x(8, 8, random_vec(64, rng));
        const GridImage back = idft2(dft2(x)).real_part();
        double err = 0.0;
        for (std::size_t i = 0; i < 64; ++i) err = std::max(err, std::abs(back.data()[i] - x.data()[i]));
        check("dft_round_trip", err < 1e-10, "max err " + io::format_number(err));
    }
    {
        const std::vector<LinearMap> maps{op_mask(Mask::random(16, 16, 0.5, Seed{3})), op_grad(16, 16),
                                          op_convolve(wrap_kernel(gaussian_kernel(5, 1.0), 16, 16)),
                                          op_radon({12, 24, 1.0}, 16, 16)};
        double worst = 0.0;
        for (const LinearMap& m : maps)
            for (int k = 0; k < 10; ++k) worst = std::max(worst, dot_test(m, rng));
        check("dot_tests", worst < 1e-10, "worst " + io::format_number(worst));
    }
    {
        const NullspaceDemo demo = nullspace_demo();
        bool ok = demo.rows.size() == 3;
        for (const auto& row : demo.rows) ok = ok && std::abs(row.sse - 1.0 / 300.0) < 5e-4;
        check("nullspace_demo", ok, "sse " + io::format_number(demo.rows.front().sse));
    }
    {
        const EllipsePhantom disk{{{0.0, 0.0, 0.5, 0.5, 0.0, 1.0}}};
        const RadonGeometry geom{90, 64, 2.0 / 64.0};
        const GridImage truth = render(disk, 64);
        const GridImage rec = fbp(analytic_sinogram(disk, geom), RampFilter::make(64, geom.detector_pitch), 64, 64,
                                  2.0 / 64.0);
        const double snr = snr_db(truth, rec);
        check("fbp_disk", snr > 10.0, "snr " + io::format_number(snr) + " dB");
    }
    {
        const SparseInstance inst = sparse_recovery_instance();
        const Objective obj{inst.forward(), inst.data, std::nullopt, Penalty::abs, 1e-3};
        const SolveReport rep = ista(obj, Vec(inst.cols, 0.0), true, 5000, 1e-14);
        const double snr = snr_db(inst.truth, rep.solution());
        check("fista_sparse_recovery", snr > 30.0, "snr " + io::format_number(snr) + " dB");
    }
    log << (failures ? "selftest FAILED" : "selftest passed") << "\n";
    return failures ? 3 : 0;
}

} // namespace recon::cli
