// Command-line front end: ingest measure files, run interpolations and the
// rate experiments, and emit plot-ready CSV/JSON.
//
// Exit codes: 0 success, 2 schema error, 3 numerical failure, 4 mesh too coarse.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsplines/io.hpp"
#include "tsplines/tsplines.hpp"

namespace ts = tsplines;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_schema = 2;
constexpr int exit_numeric = 3;
constexpr int exit_mesh = 4;

std::vector<double> parse_double_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            const double v = std::stod(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ts::SchemaError(std::string("cannot parse ") + what + " entry: " + item);
        }
    }
    if (out.empty()) {
        throw ts::SchemaError(std::string(what) + " list is empty");
    }
    return out;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("TSPLINES_SEED")) {
        return static_cast<std::uint64_t>(std::strtoull(env, nullptr, 10));
    }
    return 0;
}

ts::InterpKind parse_kind(const std::string& kind) {
    if (kind == "cubic") return ts::InterpKind::Cubic;
    if (kind == "linear") return ts::InterpKind::PiecewiseLinear;
    throw ts::SchemaError("unknown interpolation kind: " + kind);
}

json law_to_json(const ts::GaussianMeasure& g) {
    json j;
    j["mean"] = std::vector<double>(g.mean().data(), g.mean().data() + g.mean().size());
    std::vector<double> cov;
    for (Eigen::Index r = 0; r < g.dim(); ++r) {
        for (Eigen::Index c = 0; c < g.dim(); ++c) cov.push_back(g.cov_matrix()(r, c));
    }
    j["cov"] = cov;
    return j;
}

// ---------------------------------------------------------------- interpolate

struct InterpolateOptions {
    std::string input;
    std::string kind = "cubic";
    std::string times_text;
    int samples = 0;
    std::uint64_t seed = default_seed();
    std::string out;
    std::string format = "csv";
};

int run_interpolate(const InterpolateOptions& opt) {
    const ts::MeasureFile file = ts::load_measure_file(opt.input);
    for (const auto& rec : file.records) {
        if (rec.has_site) {
            throw ts::SchemaError("interpolate expects 'time' records, not 'site' records");
        }
    }
    std::vector<double> knots;
    for (const auto& rec : file.records) knots.push_back(rec.time);
    const ts::TimeGrid grid = [&] {
        try {
            return ts::TimeGrid(knots);
        } catch (const ts::Error& e) {
            throw ts::SchemaError(std::string("bad knot times: ") + e.what());
        }
    }();

    const std::vector<double> times =
        opt.times_text.empty() ? grid.knots() : parse_double_list(opt.times_text, "times");
    const ts::InterpKind kind = parse_kind(opt.kind);

    std::mt19937_64 rng(opt.seed);
    std::ostringstream csv;
    json doc;
    doc["times"] = times;

    auto write_output = [&](const std::string& text) {
        ts::write_text_atomic(opt.out, text);
    };

    if (file.family == ts::MeasureRecord::Family::Gaussian) {
        std::vector<ts::GaussianMeasure> obs;
        for (const auto& rec : file.records) obs.push_back(std::get<ts::GaussianMeasure>(rec.payload));
        const ts::TransportSpline spline = ts::TransportSpline::fit(grid, obs, kind);
        const Eigen::Index d = obs.front().dim();

        json laws = json::array();
        csv << "time";
        for (Eigen::Index i = 0; i < d; ++i) csv << ",mean_" << i;
        for (Eigen::Index r = 0; r < d; ++r) {
            for (Eigen::Index c = 0; c < d; ++c) csv << ",cov_" << r << "_" << c;
        }
        csv << "\n";
        for (double t : times) {
            const ts::GaussianMeasure law = spline.gaussian_law(t);
            csv << ts::format_double(t);
            for (Eigen::Index i = 0; i < d; ++i) csv << "," << ts::format_double(law.mean()(i));
            for (Eigen::Index r = 0; r < d; ++r) {
                for (Eigen::Index c = 0; c < d; ++c) {
                    csv << "," << ts::format_double(law.cov_matrix()(r, c));
                }
            }
            csv << "\n";
            json jl = law_to_json(law);
            jl["time"] = t;
            laws.push_back(std::move(jl));
        }
        doc["family"] = "gaussian";
        doc["laws"] = std::move(laws);

        if (opt.samples > 0) {
            const Eigen::MatrixXd root = ts::sqrtm_psd(obs.front().cov()).matrix();
            std::normal_distribution<double> normal(0.0, 1.0);
            std::vector<Eigen::MatrixXd> paths; // one d x times matrix per sample
            for (int s = 0; s < opt.samples; ++s) {
                Eigen::VectorXd z(d);
                for (Eigen::Index i = 0; i < d; ++i) z(i) = normal(rng);
                const Eigen::VectorXd x0 = obs.front().mean() + root * z;
                const auto path = spline.sample_trajectory(x0, times);
                Eigen::MatrixXd m(d, static_cast<Eigen::Index>(times.size()));
                for (std::size_t k = 0; k < times.size(); ++k) {
                    m.col(static_cast<Eigen::Index>(k)) = path[k];
                }
                paths.push_back(std::move(m));
            }
            std::ostringstream traj;
            traj << "time,sample";
            for (Eigen::Index i = 0; i < d; ++i) traj << ",x_" << i;
            traj << "\n";
            json jtraj = json::array();
            for (std::size_t k = 0; k < times.size(); ++k) {
                for (int s = 0; s < opt.samples; ++s) {
                    traj << ts::format_double(times[k]) << "," << s;
                    json row;
                    row["time"] = times[k];
                    row["sample"] = s;
                    std::vector<double> coords;
                    for (Eigen::Index i = 0; i < d; ++i) {
                        traj << "," << ts::format_double(paths[s](i, static_cast<Eigen::Index>(k)));
                        coords.push_back(paths[s](i, static_cast<Eigen::Index>(k)));
                    }
                    row["x"] = coords;
                    traj << "\n";
                    jtraj.push_back(std::move(row));
                }
            }
            doc["trajectories"] = std::move(jtraj);
            if (opt.format == "csv") {
                ts::write_text_atomic(opt.out + ".traj.csv", traj.str());
            }
        }
    } else if (file.family == ts::MeasureRecord::Family::Measure1D) {
        std::vector<ts::Measure1D> obs;
        for (const auto& rec : file.records) obs.push_back(std::get<ts::Measure1D>(rec.payload));
        const ts::TransportSpline spline = ts::TransportSpline::fit(grid, obs, kind);
        const auto& levels = ts::Measure1D::default_levels();

        csv << "time,level,quantile\n";
        json laws = json::array();
        for (double t : times) {
            const Eigen::VectorXd q = spline.quantile_curve(t, levels);
            json jl;
            jl["time"] = t;
            std::vector<double> values;
            for (Eigen::Index k = 0; k < q.size(); ++k) {
                csv << ts::format_double(t) << "," << ts::format_double(levels[k]) << ","
                    << ts::format_double(q(k)) << "\n";
                values.push_back(q(k));
            }
            jl["quantiles"] = std::move(values);
            laws.push_back(std::move(jl));
        }
        doc["family"] = "measure1d";
        doc["quantile_valid"] = spline.quantile_spline_valid();
        doc["laws"] = std::move(laws);

        if (opt.samples > 0) {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            std::ostringstream traj;
            traj << "time,sample,x\n";
            json jtraj = json::array();
            std::vector<double> draws;
            for (int s = 0; s < opt.samples; ++s) {
                double u = unif(rng);
                u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
                draws.push_back(u);
            }
            for (std::size_t k = 0; k < times.size(); ++k) {
                for (int s = 0; s < opt.samples; ++s) {
                    const double v = spline.quantile_at(times[k], draws[s]);
                    traj << ts::format_double(times[k]) << "," << s << ","
                         << ts::format_double(v) << "\n";
                    jtraj.push_back({{"time", times[k]}, {"sample", s}, {"x", v}});
                }
            }
            doc["trajectories"] = std::move(jtraj);
            if (opt.format == "csv") {
                ts::write_text_atomic(opt.out + ".traj.csv", traj.str());
            }
        }
    } else {
        std::vector<ts::PointCloud> obs;
        for (const auto& rec : file.records) obs.push_back(std::get<ts::PointCloud>(rec.payload));
        const ts::TransportSpline spline = ts::TransportSpline::fit(grid, obs, kind);
        const Eigen::Index d = obs.front().dim();

        csv << "time,point";
        for (Eigen::Index i = 0; i < d; ++i) csv << ",x_" << i;
        csv << "\n";
        json laws = json::array();
        for (double t : times) {
            const Eigen::MatrixXd pos = spline.cloud_positions(t);
            json jl;
            jl["time"] = t;
            json pts = json::array();
            for (Eigen::Index k = 0; k < pos.rows(); ++k) {
                csv << ts::format_double(t) << "," << k;
                std::vector<double> coords;
                for (Eigen::Index i = 0; i < d; ++i) {
                    csv << "," << ts::format_double(pos(k, i));
                    coords.push_back(pos(k, i));
                }
                csv << "\n";
                pts.push_back(std::move(coords));
            }
            jl["points"] = std::move(pts);
            laws.push_back(std::move(jl));
        }
        doc["family"] = "cloud";
        doc["laws"] = std::move(laws);

        if (opt.samples > 0) {
            std::uniform_int_distribution<int> pick(0, static_cast<int>(obs.front().size()) - 1);
            std::vector<int> starts;
            for (int s = 0; s < opt.samples; ++s) starts.push_back(pick(rng));
            std::ostringstream traj;
            traj << "time,sample";
            for (Eigen::Index i = 0; i < d; ++i) traj << ",x_" << i;
            traj << "\n";
            json jtraj = json::array();
            for (std::size_t k = 0; k < times.size(); ++k) {
                for (int s = 0; s < opt.samples; ++s) {
                    const Eigen::VectorXd v =
                        spline.sample_trajectory(obs.front().point(starts[s]), {times[k]}).front();
                    traj << ts::format_double(times[k]) << "," << s;
                    std::vector<double> coords;
                    for (Eigen::Index i = 0; i < d; ++i) {
                        traj << "," << ts::format_double(v(i));
                        coords.push_back(v(i));
                    }
                    traj << "\n";
                    jtraj.push_back({{"time", times[k]}, {"sample", s}, {"x", coords}});
                }
            }
            doc["trajectories"] = std::move(jtraj);
            if (opt.format == "csv") {
                ts::write_text_atomic(opt.out + ".traj.csv", traj.str());
            }
        }
    }

    if (opt.format == "json") {
        write_output(doc.dump(2) + "\n");
    } else if (opt.format == "csv") {
        write_output(csv.str());
    } else {
        throw ts::SchemaError("unknown output format: " + opt.format);
    }
    return exit_ok;
}

// ----------------------------------------------------------------------- rate

struct RateOptions {
    std::string curve = "sinusoid";
    std::string kind = "cubic";
    std::string meshes_text = "0.125,0.0625,0.03125,0.015625";
    double alpha = 1.0;
    std::string out;
};

int run_rate(const RateOptions& opt) {
    ts::SyntheticGaussianCurve::ScalarKind curve_kind;
    if (opt.curve == "sinusoid") {
        curve_kind = ts::SyntheticGaussianCurve::ScalarKind::Sinusoid;
    } else if (opt.curve == "counterexample") {
        curve_kind = ts::SyntheticGaussianCurve::ScalarKind::Counterexample;
    } else {
        throw ts::SchemaError("unknown curve: " + opt.curve);
    }
    std::vector<double> meshes = parse_double_list(opt.meshes_text, "meshes");
    for (double& m : meshes) {
        if (m > 1.0) m = 1.0 / m; // accept interval counts as well as deltas
    }

    const auto curve = ts::make_scalar_variance_curve(curve_kind);
    const ts::RateReport report =
        ts::run_rate_experiment(curve, parse_kind(opt.kind), meshes, opt.alpha);

    std::ostringstream csv;
    csv << "delta,sup_error,bound,ratio\n";
    for (const auto& e : report.entries) {
        csv << ts::format_double(e.delta) << "," << ts::format_double(e.sup_error) << ","
            << ts::format_double(e.bound) << "," << ts::format_double(e.ratio) << "\n";
    }
    ts::write_text_atomic(opt.out, csv.str());

    json sidecar;
    sidecar["slope"] = report.slope;
    sidecar["curve"] = opt.curve;
    sidecar["kind"] = opt.kind;
    sidecar["lipschitz"] = report.lipschitz;
    sidecar["curvature"] = report.curvature;
    sidecar["lambda_min"] = report.lambda_min;
    ts::write_text_atomic(opt.out + ".json", sidecar.dump(2) + "\n");
    return exit_ok;
}

// ------------------------------------------------------------------ thinplate

struct ThinplateOptions {
    std::string input;
    std::string grid_text = "20x20";
    std::string quantiles_text = "0.5";
    std::string out;
};

int run_thinplate(const ThinplateOptions& opt) {
    const ts::MeasureFile file = ts::load_measure_file(opt.input);
    if (file.family != ts::MeasureRecord::Family::Measure1D) {
        throw ts::SchemaError("thinplate expects measure1d records with sites");
    }
    std::vector<Eigen::Vector2d> sites;
    std::vector<ts::Measure1D> measures;
    for (const auto& rec : file.records) {
        if (!rec.has_site) {
            throw ts::SchemaError("thinplate records need 'site' coordinates");
        }
        sites.push_back(rec.site);
        measures.push_back(std::get<ts::Measure1D>(rec.payload));
    }

    int w = 0, h = 0;
    if (std::sscanf(opt.grid_text.c_str(), "%dx%d", &w, &h) != 2 || w < 2 || h < 2) {
        throw ts::SchemaError("grid must look like WxH with W,H >= 2");
    }
    const std::vector<double> quantiles = parse_double_list(opt.quantiles_text, "quantiles");
    for (double q : quantiles) {
        if (!(q > 0.0 && q < 1.0)) {
            throw ts::SchemaError("quantile levels must lie strictly inside (0,1)");
        }
    }

    bool all_gaussian = true;
    for (const auto& m : measures) {
        if (m.tag() != ts::Measure1D::Tag::Gaussian) all_gaussian = false;
    }

    ts::MeasureField field = [&] {
        if (all_gaussian) {
            std::vector<ts::Gaussian1D> gs;
            for (const auto& m : measures) gs.push_back({m.param1(), m.param2()});
            return ts::fit_gaussian_field(sites, gs);
        }
        // one surface per level; a modest grid keeps desk-scale runs fast
        std::vector<double> levels;
        for (int k = 1; k < 64; ++k) levels.push_back(k / 64.0);
        return ts::MeasureField::fit_general(sites, measures, levels);
    }();

    double lo_x = sites[0](0), hi_x = lo_x, lo_y = sites[0](1), hi_y = lo_y;
    for (const auto& s : sites) {
        lo_x = std::min(lo_x, s(0));
        hi_x = std::max(hi_x, s(0));
        lo_y = std::min(lo_y, s(1));
        hi_y = std::max(hi_y, s(1));
    }

    std::ostringstream csv;
    csv << "x,y,mean,std";
    for (double q : quantiles) csv << ",q_" << ts::format_double(q);
    csv << ",degenerate\n";
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            const double x = lo_x + (hi_x - lo_x) * i / (w - 1);
            const double y = lo_y + (hi_y - lo_y) * j / (h - 1);
            const Eigen::Vector2d p(x, y);
            csv << ts::format_double(x) << "," << ts::format_double(y) << ","
                << ts::format_double(field.mean_at(p)) << ","
                << ts::format_double(field.std_at(p));
            for (double q : quantiles) csv << "," << ts::format_double(field.quantile(p, q));
            csv << "," << (field.degenerate_at(p) ? 1 : 0) << "\n";
        }
    }
    ts::write_text_atomic(opt.out, csv.str());
    return exit_ok;
}

// ------------------------------------------------------------- counterexample

struct CounterexampleOptions {
    int samples = 50;
    std::string coupling = "independent";
    std::string times_text = "0,0.125,0.25,0.375,0.5,0.625,0.75,0.875,1";
    std::uint64_t seed = default_seed();
    std::string out;
};

int run_counterexample(const CounterexampleOptions& opt) {
    ts::TrajectorySet::Coupling coupling;
    if (opt.coupling == "independent") {
        coupling = ts::TrajectorySet::Coupling::Independent;
    } else if (opt.coupling == "transport") {
        coupling = ts::TrajectorySet::Coupling::Transport;
    } else {
        throw ts::SchemaError("unknown coupling: " + opt.coupling);
    }
    const std::vector<double> times = parse_double_list(opt.times_text, "times");

    std::mt19937_64 rng(opt.seed);
    const ts::TrajectorySet set =
        ts::generate_counterexample_trajectories(opt.samples, coupling, rng);

    std::ostringstream csv;
    csv << "time,sample,x\n";
    for (double t : times) {
        const Eigen::VectorXd values = set.values_at(t);
        for (Eigen::Index s = 0; s < values.size(); ++s) {
            csv << ts::format_double(t) << "," << s << "," << ts::format_double(values(s))
                << "\n";
        }
    }
    ts::write_text_atomic(opt.out, csv.str());
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transport splines: smooth interpolation of probability measures"};
    app.require_subcommand(1);

    InterpolateOptions interp;
    auto* cmd_interp = app.add_subcommand(
        "interpolate", "Interpolate a family of measures and optionally sample trajectories");
    cmd_interp->add_option("input", interp.input, "measure file (JSON)")->required();
    cmd_interp->add_option("--kind", interp.kind, "cubic | linear");
    cmd_interp->add_option("--times", interp.times_text, "comma-separated evaluation times");
    cmd_interp->add_option("--samples", interp.samples, "number of sampled trajectories");
    cmd_interp->add_option("--seed", interp.seed, "RNG seed (default: $TSPLINES_SEED or 0)");
    cmd_interp->add_option("--out", interp.out, "output path")->required();
    cmd_interp->add_option("--format", interp.format, "csv | json");

    RateOptions rate;
    auto* cmd_rate = app.add_subcommand("rate", "Convergence-rate experiment");
    cmd_rate->add_option("--curve", rate.curve, "sinusoid | counterexample");
    cmd_rate->add_option("--kind", rate.kind, "cubic | linear");
    cmd_rate->add_option("--meshes", rate.meshes_text, "comma-separated deltas (or interval counts)");
    cmd_rate->add_option("--alpha", rate.alpha, "target mesh ratio in (0,1]");
    cmd_rate->add_option("--out", rate.out, "output CSV path (slope sidecar gets .json)")
        ->required();

    ThinplateOptions tp;
    auto* cmd_tp = app.add_subcommand("thinplate", "Thin-plate measure field raster");
    cmd_tp->add_option("input", tp.input, "sites + measures file (JSON)")->required();
    cmd_tp->add_option("--grid", tp.grid_text, "raster size WxH");
    cmd_tp->add_option("--quantiles", tp.quantiles_text, "comma-separated levels");
    cmd_tp->add_option("--out", tp.out, "output CSV path")->required();

    CounterexampleOptions ce;
    auto* cmd_ce = app.add_subcommand("counterexample", "Trajectory sets for the two couplings");
    cmd_ce->add_option("--samples", ce.samples, "number of trajectories");
    cmd_ce->add_option("--coupling", ce.coupling, "independent | transport");
    cmd_ce->add_option("--times", ce.times_text, "comma-separated evaluation times");
    cmd_ce->add_option("--seed", ce.seed, "RNG seed (default: $TSPLINES_SEED or 0)");
    cmd_ce->add_option("--out", ce.out, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_interp->parsed()) return run_interpolate(interp);
        if (cmd_rate->parsed()) return run_rate(rate);
        if (cmd_tp->parsed()) return run_thinplate(tp);
        if (cmd_ce->parsed()) return run_counterexample(ce);
    } catch (const ts::MeshTooCoarse& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_mesh;
    } catch (const ts::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_schema;
    } catch (const ts::MixedFamilies& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_schema;
    } catch (const ts::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
    return exit_ok;
}
