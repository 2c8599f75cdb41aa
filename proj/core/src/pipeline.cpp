#include "helfb/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "helfb/blowup.hpp"
#include "helfb/free_boundary.hpp"
#include "helfb/operator.hpp"
#include "helfb/reconstruct.hpp"

namespace helfb {

namespace {

namespace fs = std::filesystem;

std::optional<double> parse_number(const std::string& raw) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
    if (ec != std::errc{} || ptr != raw.data() + raw.size()) return std::nullopt;
    return value;
}

std::vector<double> default_validation_mesh() {
    std::vector<double> mesh;
    for (double s = -3.0; s <= 3.0 + 1e-12; s += 0.01) mesh.push_back(s);
    return mesh;
}

}  // namespace

RunConfig RunConfig::parse(const io::IniConfig& ini) {
    RunConfig cfg;

    const double kappa = ini.get_double("pitch.kappa");
    if (kappa == 0.0 || !std::isfinite(kappa)) throw ConfigError("pitch must be nonzero");
    cfg.pitch = Pitch(kappa);

    cfg.lambda = ini.get_double("bernoulli.lambda");
    if (!(cfg.lambda > 0.0)) throw ConfigError("lambda must be positive");

    cfg.h = ini.get_double("grid.h");
    if (!(cfg.h > 0.0)) throw ConfigError("grid spacing h must be positive");

    const std::string kind = ini.get_string("domain.kind");
    if (kind == "rectangle") {
        RectDomain rect{{ini.get_double("domain.xmin"), ini.get_double("domain.ymin")},
                        {ini.get_double("domain.xmax"), ini.get_double("domain.ymax")}};
        if (!(rect.hi.x > rect.lo.x) || !(rect.hi.y > rect.lo.y)) {
            throw ConfigError("rectangle domain is degenerate");
        }
        cfg.domain = rect;
    } else if (kind == "annulus") {
        AnnulusDomain ann{{ini.get_double("domain.cx", 0.0), ini.get_double("domain.cy", 0.0)},
                          ini.get_double("domain.r_inner", 0.0),
                          ini.get_double("domain.r_outer")};
        if (!(ann.r_outer > ann.r_inner) || ann.r_inner < 0.0) {
            throw ConfigError("annulus radii must satisfy 0 <= r_inner < r_outer");
        }
        cfg.domain = ann;
    } else if (kind == "polygon") {
        PolygonDomain poly;
        std::string spec = ini.get_string("domain.vertices");
        std::vector<Vec2> ring;
        std::vector<double> nums;
        std::string token;
        auto flush_token = [&]() {
            if (token.empty()) return;
            auto v = parse_number(token);
            if (!v) throw ConfigError("polygon vertex list: not a number: '" + token + "'");
            nums.push_back(*v);
            token.clear();
        };
        auto flush_ring = [&]() {
            flush_token();
            if (nums.size() % 2 != 0) throw ConfigError("polygon ring needs x,y pairs");
            for (std::size_t k = 0; k + 1 < nums.size(); k += 2) {
                ring.push_back({nums[k], nums[k + 1]});
            }
            nums.clear();
            if (ring.size() >= 3) poly.rings.push_back(ring);
            else if (!ring.empty()) throw ConfigError("polygon ring needs >= 3 vertices");
            ring.clear();
        };
        for (char c : spec) {
            if (c == '|') flush_ring();
            else if (c == ',' || c == ';' || c == ' ') flush_token();
            else token += c;
        }
        flush_ring();
        if (poly.rings.empty()) throw ConfigError("polygon domain has no rings");
        cfg.domain = poly;
    } else {
        throw ConfigError("unknown domain kind: " + kind);
    }

    const std::string pkind = ini.get_string("profile.kind", "zero");
    const double f0 = ini.get_double("profile.f0", 1.0);
    if (pkind == "zero") {
        cfg.profile = VorticityProfile::zero();
    } else if (pkind == "sigmoid") {
        cfg.profile = VorticityProfile::sigmoid(f0);
    } else if (pkind == "tabulated") {
        cfg.profile = VorticityProfile::tabulated_from_csv(ini.get_string("profile.table"), f0);
    } else {
        throw ConfigError("unknown profile kind: " + pkind);
    }
    const auto mesh = default_validation_mesh();
    const ProfileValidation pv = validate_profile(cfg.profile, mesh);
    if (!pv.ok) {
        throw ConfigError("vorticity profile inadmissible: " + pv.what + " at s = " +
                          io::format_double(pv.s_violation));
    }

    cfg.fixed_boundary = ini.section("fixed_boundary");

    const std::string mode = ini.get_string("problem.mode", "minimize");
    if (mode == "minimize") cfg.mode = Mode::Minimize;
    else if (mode == "exact_halfplane") cfg.mode = Mode::ExactHalfPlane;
    else if (mode == "exact_radial") cfg.mode = Mode::ExactRadial;
    else throw ConfigError("unknown problem mode: " + mode);
    cfg.halfplane_h0 = ini.get_double("problem.h0", 0.5);
    cfg.radial_r0 = ini.get_double("problem.r0", 1.0);

    cfg.solver.eps_start_factor = ini.get_double("solver.eps_start_factor", 8.0);
    cfg.solver.eps_floor_factor = ini.get_double("solver.eps_floor_factor", 2.0);
    cfg.solver.eps_shrink = ini.get_double("solver.eps_shrink", 0.5);
    cfg.solver.grad_tol_rel = ini.get_double("solver.tol_rel", 1e-8);
    cfg.solver.max_iterations_per_stage = ini.get_int("solver.max_iter", 5000);
    if (!(cfg.solver.eps_start_factor >= cfg.solver.eps_floor_factor) ||
        !(cfg.solver.eps_floor_factor > 0.0)) {
        throw ConfigError("solver epsilon schedule must satisfy start >= floor > 0");
    }
    if (!(cfg.solver.grad_tol_rel > 0.0)) throw ConfigError("solver tolerance must be positive");

    cfg.theta_factor = ini.get_double("analyze.theta_factor", 0.5);
    cfg.fb_points = ini.get_int("analyze.fb_points", 3);
    cfg.r_max = ini.get_double("analyze.r_max", 0.0);
    cfg.seed = static_cast<unsigned>(ini.get_int("analyze.seed", 12345));

    cfg.probe_spacing_factor = ini.get_double("reconstruct.spacing_factor", 2.0);
    cfg.z_layers = ini.get_int("reconstruct.z_layers", 2);
    return cfg;
}

CrossSectionGrid RunConfig::make_grid() const {
    std::vector<DirichletPatch> patches;
    for (const auto& [name, raw] : fixed_boundary) {
        std::function<double(const Vec2&)> value;
        if (auto num = parse_number(raw)) {
            const double v = *num;
            value = [v](const Vec2&) { return v; };
        } else if (raw == "radial_exact") {
            const RadialSolution sol{lambda, pitch.kappa(), radial_r0};
            value = [sol](const Vec2& p) { return sol.value(p); };
        } else if (raw == "halfplane_exact") {
            const HalfPlaneSolution sol{lambda, halfplane_h0};
            value = [sol](const Vec2& p) { return sol.value(p); };
        } else {
            throw ConfigError("unknown fixed boundary value: '" + raw + "'");
        }
        if (const auto* rect = std::get_if<RectDomain>(&domain)) {
            patches.push_back(rect_edge_patch(*rect, name, value, 0.25 * h));
        } else if (const auto* ann = std::get_if<AnnulusDomain>(&domain)) {
            patches.push_back(annulus_ring_patch(*ann, name, value));
        } else {
            if (name != "all") throw ConfigError("polygon domains support only 'all' patches");
            patches.push_back({[](const Vec2&) { return true; }, value});
        }
    }
    return build_grid(domain, h, patches);
}

nlohmann::json RunConfig::domain_json() const {
    nlohmann::json j;
    if (const auto* rect = std::get_if<RectDomain>(&domain)) {
        j["kind"] = "rectangle";
        j["xmin"] = rect->lo.x;
        j["ymin"] = rect->lo.y;
        j["xmax"] = rect->hi.x;
        j["ymax"] = rect->hi.y;
    } else if (const auto* ann = std::get_if<AnnulusDomain>(&domain)) {
        j["kind"] = "annulus";
        j["cx"] = ann->center.x;
        j["cy"] = ann->center.y;
        j["r_inner"] = ann->r_inner;
        j["r_outer"] = ann->r_outer;
    } else {
        j["kind"] = "polygon";
    }
    return j;
}

nlohmann::json RunConfig::echo_json() const {
    nlohmann::json j;
    j["kappa"] = pitch.kappa();
    j["lambda"] = lambda;
    j["h"] = h;
    j["domain"] = domain_json();
    j["profile"] =
        profile.kind() == VorticityProfile::Kind::Zero
            ? "zero"
            : (profile.kind() == VorticityProfile::Kind::Sigmoid ? "sigmoid" : "tabulated");
    j["mode"] = mode == Mode::Minimize
                    ? "minimize"
                    : (mode == Mode::ExactHalfPlane ? "exact_halfplane" : "exact_radial");
    nlohmann::json fb = nlohmann::json::array();
    for (const auto& [name, value] : fixed_boundary) {
        fb.push_back({{"patch", name}, {"value", value}});
    }
    j["fixed_boundary"] = fb;
    return j;
}

namespace {

nlohmann::json grid_json(const RunConfig& cfg, const CrossSectionGrid& g) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = kToolVersion;
    j["origin"] = {g.origin.x, g.origin.y};
    j["h"] = g.h;
    j["nx"] = g.nx;
    j["ny"] = g.ny;
    j["active_nodes"] = g.count_active_nodes();
    j["active_cells"] = g.count_active_cells();
    j["dirichlet_nodes"] = g.count_dirichlet_nodes();
    j["config"] = cfg.echo_json();
    return j;
}

void check_grid_json(const nlohmann::json& j, const CrossSectionGrid& g) {
    if (j.value("nx", -1) != g.nx || j.value("ny", -1) != g.ny ||
        j.value("active_nodes", -1) != g.count_active_nodes() ||
        std::abs(j.value("h", 0.0) - g.h) > 1e-15) {
        throw ConfigError("grid.json does not match the grid rebuilt from the config");
    }
}

struct LoadedRun {
    RunConfig cfg;
    std::shared_ptr<const CrossSectionGrid> grid;
    std::shared_ptr<StreamField> psi;
};

LoadedRun load_run(const std::string& config_path, const std::string& out_dir) {
    LoadedRun run;
    run.cfg = RunConfig::parse(io::IniConfig::parse_file(config_path));
    run.grid = std::make_shared<const CrossSectionGrid>(run.cfg.make_grid());
    const fs::path dir(out_dir);
    std::ifstream gj(dir / "grid.json");
    if (!gj) throw ConfigError("missing grid.json in " + out_dir + " (run solve first)");
    nlohmann::json meta = nlohmann::json::parse(gj);
    check_grid_json(meta, *run.grid);
    run.psi = std::make_shared<StreamField>(run.grid);
    io::fill_stream_field_from_csv((dir / "psi.csv").string(), *run.psi);
    return run;
}

}  // namespace

int run_solve(const std::string& config_path, const std::string& out_dir, bool quiet,
              std::ostream& log) {
    try {
        const RunConfig cfg = RunConfig::parse(io::IniConfig::parse_file(config_path));
        auto grid = std::make_shared<const CrossSectionGrid>(cfg.make_grid());
        fs::create_directories(out_dir);
        const fs::path dir(out_dir);

        bool converged = true;
        nlohmann::json report;
        report["schema_version"] = kSchemaVersion;
        report["tool_version"] = kToolVersion;
        report["config"] = cfg.echo_json();

        StreamField psi(grid);
        if (cfg.mode == RunConfig::Mode::Minimize) {
            auto [field, solve_report] = minimize(grid, cfg.pitch, cfg.profile, cfg.lambda,
                                                  cfg.solver);
            psi = std::move(field);
            converged = solve_report.converged;
            report["converged"] = solve_report.converged;
            report["initial_pg_norm"] = solve_report.initial_pg_norm;
            report["final_pg_norm"] = solve_report.final_pg_norm;
            report["projection_activations"] = solve_report.projection_activations;
            report["max_dirichlet_violation"] = solve_report.max_dirichlet_violation;
            report["min_iterate_value"] = solve_report.min_iterate_value;
            nlohmann::json stages = nlohmann::json::array();
            for (const StageReport& st : solve_report.stages) {
                nlohmann::json s;
                s["epsilon"] = st.epsilon;
                s["iterations"] = st.iterations;
                s["converged"] = st.converged;
                s["final_energy"] = st.final_energy;
                s["final_pg_norm"] = st.final_pg_norm;
                // The full history is large; record the envelope.
                s["energy_first"] = st.energy_history.front();
                s["energy_last"] = st.energy_history.back();
                s["energy_monotone"] =
                    std::is_sorted(st.energy_history.rbegin(), st.energy_history.rend());
                stages.push_back(std::move(s));
            }
            report["stages"] = std::move(stages);
        } else if (cfg.mode == RunConfig::Mode::ExactHalfPlane) {
            const HalfPlaneSolution sol{cfg.lambda, cfg.halfplane_h0};
            psi.sample([&](const Vec2& p) { return sol.value(p); });
            report["converged"] = true;
            report["exact_solution"] = "halfplane";
        } else {
            const RadialSolution sol{cfg.lambda, cfg.pitch.kappa(), cfg.radial_r0};
            psi.sample([&](const Vec2& p) { return sol.value(p); });
            report["converged"] = true;
            report["exact_solution"] = "radial";
        }

        io::write_file_atomic((dir / "psi.csv").string(), io::stream_field_csv(psi));
        io::write_json_atomic((dir / "grid.json").string(), grid_json(cfg, *grid));
        io::write_json_atomic((dir / "solve_report.json").string(), report);
        if (!quiet) {
            log << "solve: wrote psi.csv, grid.json, solve_report.json to " << out_dir << "\n";
            log << "solve: " << (converged ? "converged" : "NOT converged") << "\n";
        }
        return converged ? kExitOk : kExitNotConverged;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitInternalError;
    }
}

int run_analyze(const std::string& config_path, const std::string& out_dir, bool quiet,
                std::ostream& log) {
    try {
        LoadedRun run = load_run(config_path, out_dir);
        const RunConfig& cfg = run.cfg;
        const CrossSectionGrid& g = *run.grid;
        const fs::path dir(out_dir);

        nlohmann::json diag;
        diag["schema_version"] = kSchemaVersion;
        diag["tool_version"] = kToolVersion;
        diag["config"] = cfg.echo_json();

        const double theta = cfg.theta_factor * g.h * cfg.lambda;
        diag["extraction_level"] = theta;
        std::vector<FreeBoundaryCurve> curves = extract_free_boundary(*run.psi, theta);
        // Sensitivity companion at half the level.
        const auto curves_half = extract_free_boundary(*run.psi, 0.5 * theta);
        diag["extraction_sensitivity"] = {
            {"level", 0.5 * theta},
            {"curves", curves_half.size()},
            {"vertices", [&] {
                 std::size_t n = 0;
                 for (const auto& c : curves_half) n += c.vertices.size();
                 return n;
             }()}};

        if (curves.empty()) {
            diag["fb_empty"] = true;
            io::write_json_atomic((dir / "diagnostics.json").string(), diag);
            io::write_file_atomic((dir / "fb_curve.csv").string(), "x,y,residual\n");
            if (!quiet) log << "analyze: empty free boundary\n";
            return kExitOk;
        }
        diag["fb_empty"] = false;

        nlohmann::json curves_json = nlohmann::json::array();
        std::string fb_csv = "x,y,residual\n";
        std::size_t main_curve = 0;
        for (std::size_t c = 0; c < curves.size(); ++c) {
            FbConditionStats stats =
                fb_condition_residual(*run.psi, curves[c], cfg.pitch, cfg.lambda);
            if (curves[c].vertices.size() > curves[main_curve].vertices.size()) main_curve = c;
            nlohmann::json cj;
            cj["vertices"] = curves[c].vertices.size();
            cj["closed"] = curves[c].closed;
            cj["residual_max_abs"] = stats.max_abs;
            cj["residual_mean"] = stats.mean;
            cj["residual_rms"] = stats.rms;
            cj["residual_skipped"] = stats.skipped;
            curves_json.push_back(std::move(cj));
            for (std::size_t k = 0; k < curves[c].vertices.size(); ++k) {
                fb_csv += io::format_double(curves[c].vertices[k].x);
                fb_csv += ',';
                fb_csv += io::format_double(curves[c].vertices[k].y);
                fb_csv += ',';
                fb_csv += io::format_double(curves[c].residuals[k]);
                fb_csv += '\n';
            }
            if (c + 1 < curves.size()) fb_csv += '\n';
        }
        diag["fb_curves"] = std::move(curves_json);

        // Diagnostic centers spread along the main curve.
        const FreeBoundaryCurve& main = curves[main_curve];
        const int points = std::max(1, cfg.fb_points);
        std::vector<Vec2> centers;
        for (int k = 0; k < points; ++k) {
            centers.push_back(
                main.vertices[(k * main.vertices.size()) / points]);
        }

        FlatnessOptions fopt;
        fopt.seed = cfg.seed;
        nlohmann::json per_point = nlohmann::json::array();
        for (const Vec2& x0 : centers) {
            nlohmann::json pj;
            pj["center"] = {x0.x, x0.y};
            const double reach = 0.95 * run.psi->domain_radius(x0);
            double r_hi = cfg.r_max > 0.0 ? std::min(cfg.r_max, reach) : reach;
            if (r_hi >= 4.0 * g.h) {
                const std::vector<double> radii = dyadic_radii(r_hi, 4.0 * g.h);
                const FlatnessReport flat =
                    flatness_profile(run.psi, x0, cfg.pitch, radii, cfg.lambda, fopt);
                pj["radii"] = radii;
                pj["flatness_deficit"] = flat.deficits;
                nlohmann::json dirs = nlohmann::json::array();
                for (const Vec2& nu : flat.directions) dirs.push_back({nu.x, nu.y});
                pj["flatness_direction"] = std::move(dirs);

                auto rectified = freeze_and_rectify(run.psi, x0, cfg.pitch);
                const WeissProfile weiss = weiss_energy(*rectified, radii, cfg.lambda);
                pj["weiss"] = weiss.values;

                const NondegeneracyProfile nd = nondegeneracy_ratio(*run.psi, x0, radii);
                pj["nondegeneracy_ratio"] = nd.ratios;
                pj["nondegeneracy_c0"] = nd.c0;
                pj["degenerate"] = nd.degenerate;
            } else {
                pj["radii"] = nlohmann::json::array();
                pj["note"] = "domain too small for blow-up radii >= 4h";
            }
            per_point.push_back(std::move(pj));
        }
        diag["fb_point_diagnostics"] = std::move(per_point);

        const LipschitzReport lip = lipschitz_report(*run.psi);
        diag["lipschitz"] = {{"sup_gradient", lip.sup_gradient},
                             {"sup_gradient_at", {lip.sup_gradient_at.x, lip.sup_gradient_at.y}},
                             {"sup_ratio", lip.sup_ratio},
                             {"sup_ratio_at", {lip.sup_ratio_at.x, lip.sup_ratio_at.y}},
                             {"ratio_defined", lip.ratio_defined}};

        const double eps_floor = cfg.solver.eps_floor_factor * g.h;
        const StationarityReport st =
            check_stationarity(*run.psi, cfg.pitch, cfg.profile, cfg.lambda, eps_floor);
        diag["stationarity"] = {{"interior_max_abs", st.interior_max_abs},
                                {"interior_rms", st.interior_rms},
                                {"interior_nodes", st.interior_nodes},
                                {"subsolution_min", st.subsolution_min},
                                {"subsolution_nodes", st.subsolution_nodes}};

        io::write_json_atomic((dir / "diagnostics.json").string(), diag);
        io::write_file_atomic((dir / "fb_curve.csv").string(), fb_csv);
        if (!quiet) {
            log << "analyze: " << curves.size() << " free boundary curve(s), wrote "
                << "diagnostics.json and fb_curve.csv\n";
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitInternalError;
    }
}

int run_reconstruct(const std::string& config_path, const std::string& out_dir, bool quiet,
                    std::ostream& log) {
    try {
        LoadedRun run = load_run(config_path, out_dir);
        const RunConfig& cfg = run.cfg;
        const CrossSectionGrid& g = *run.grid;
        const fs::path dir(out_dir);

        const VelocityField u0 = velocity_cross_section(*run.psi, cfg.pitch);
        const double spacing = cfg.probe_spacing_factor * g.h;
        const int stride = std::max(1, static_cast<int>(std::round(cfg.probe_spacing_factor)));

        std::string csv = "x,y,z,u1,u2,u3\n";
        for (int l = -cfg.z_layers; l <= cfg.z_layers; ++l) {
            const double z = l * spacing;
            for (int j = 0; j <= g.ny; j += stride) {
                for (int i = 0; i <= g.nx; i += stride) {
                    if (!g.node_active[g.node_index(i, j)]) continue;
                    const Vec2 p = g.node_pos(i, j);
                    const auto sample = velocity_at({p.x, p.y, z}, u0);
                    if (!sample) continue;
                    csv += io::format_double(p.x);
                    csv += ',';
                    csv += io::format_double(p.y);
                    csv += ',';
                    csv += io::format_double(z);
                    csv += ',';
                    csv += io::format_double(sample->velocity.x);
                    csv += ',';
                    csv += io::format_double(sample->velocity.y);
                    csv += ',';
                    csv += io::format_double(sample->velocity.z);
                    csv += '\n';
                }
            }
        }

        FieldResidualOptions opts;
        opts.probe_spacing = spacing;
        opts.positivity_margin = cfg.solver.eps_floor_factor * g.h;
        opts.z_layers = cfg.z_layers;
        opts.seed = cfg.seed;
        const FieldResidualReport rep = field_residuals(*run.psi, cfg.pitch, cfg.profile, opts);

        nlohmann::json rj;
        rj["schema_version"] = kSchemaVersion;
        rj["tool_version"] = kToolVersion;
        rj["config"] = cfg.echo_json();
        rj["max_divergence"] = rep.max_divergence;
        rj["divergence_probes"] = rep.divergence_probes;
        rj["max_alignment_defect"] = rep.max_alignment_defect;
        rj["alignment_probes"] = rep.alignment_probes;
        rj["alignment_below_floor"] = rep.alignment_below_floor;
        rj["max_vorticity_mismatch"] = rep.max_vorticity_mismatch;
        rj["vorticity_probes"] = rep.vorticity_probes;
        rj["max_orthogonality"] = rep.max_orthogonality;
        rj["max_helicity_law_error"] = rep.max_helicity_law_error;
        rj["helicity_probes"] = rep.helicity_probes;
        rj["max_form_discrepancy"] = u0.max_form_discrepancy();

        io::write_file_atomic((dir / "field3d.csv").string(), csv);
        io::write_json_atomic((dir / "residuals.json").string(), rj);
        if (!quiet) log << "reconstruct: wrote field3d.csv and residuals.json\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitInternalError;
    }
}

int run_validate(const std::string& config_path, bool quiet, std::ostream& log) {
    try {
        const RunConfig cfg = RunConfig::parse(io::IniConfig::parse_file(config_path));
        // Building the grid exercises the domain and fixed-boundary checks.
        const CrossSectionGrid g = cfg.make_grid();
        if (!quiet) {
            log << "config ok: kappa=" << cfg.pitch.kappa() << " lambda=" << cfg.lambda
                << " h=" << cfg.h << "\n";
            log << "grid ok: " << g.count_active_nodes() << " active nodes, "
                << g.count_dirichlet_nodes() << " Dirichlet nodes\n";
            log << "profile ok\n";
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitInternalError;
    }
}

}  // namespace helfb
