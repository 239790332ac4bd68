#include "tentlab/cli.hpp"

#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>

#include "tentlab/acim.hpp"
#include "tentlab/config.hpp"
#include "tentlab/error.hpp"
#include "tentlab/format.hpp"
#include "tentlab/inverse_limit.hpp"
#include "tentlab/render.hpp"
#include "tentlab/stability.hpp"

namespace tentlab {

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Command-line flags that override config keys; applied after the file.
class KeyFlags {
 public:
  void add(CLI::App* app, const std::string& key, const std::string& help) {
    auto& slot = slots_.emplace_back(key, std::string{}, nullptr);
    std::string flag = "--" + key;
    for (auto& ch : flag) {
      if (ch == '_') ch = '-';
    }
    std::get<2>(slot) = app->add_option(flag, std::get<1>(slot), help);
  }
  void apply(Config& cfg) const {
    for (const auto& [key, value, opt] : slots_) {
      if (opt->count() > 0) cfg.set(key, value);
    }
  }

 private:
  std::deque<std::tuple<std::string, std::string, CLI::Option*>> slots_;
};

std::string output_path(const Config& cfg, const std::string& given, const std::string& fallback) {
  if (!given.empty()) return given;
  return (std::filesystem::path(cfg.out_dir()) / fallback).string();
}

void write_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << content;
  os.flush();
  if (!os) throw IoError("write failed for '" + path + "'");
}

template <class Writer>
std::string render_to_string(Writer&& w) {
  std::ostringstream os;
  w(os);
  return os.str();
}

/// Header lines naming the version, command and every numeric parameter.
std::vector<std::string> header_lines(const std::string& command, const Config& cfg,
                                      const std::vector<std::pair<std::string, std::string>>& extra) {
  std::vector<std::string> lines{std::string("tentlab ") + TENTLAB_VERSION + " command=" + command};
  std::string params;
  for (const auto& [k, v] : extra) params += (params.empty() ? "" : " ") + k + "=" + v;
  for (const auto& kv : cfg.describe()) {
    if (kv.rfind("workers=", 0) == 0 || kv.rfind("out_dir=", 0) == 0) continue;
    params += (params.empty() ? "" : " ") + kv;
  }
  lines.push_back(params);
  return lines;
}

void prepend_header(SweepReport& rep, const std::string& command, const Config& cfg) {
  std::vector<std::pair<std::string, std::string>> extra{{"command", command}};
  for (const auto& kv : cfg.describe()) {
    if (kv.rfind("workers=", 0) == 0 || kv.rfind("out_dir=", 0) == 0) continue;
    const auto eq = kv.find('=');
    extra.push_back({"config." + kv.substr(0, eq), kv.substr(eq + 1)});
  }
  rep.params.insert(rep.params.begin(), extra.begin(), extra.end());
}

std::size_t samples_or(const Config& cfg, std::size_t fallback) {
  const auto n = cfg.integer("samples");
  return n > 0 ? static_cast<std::size_t>(n) : fallback;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"tentlab: tent-map inverse limits, acims and their stability"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key = value config file");

  auto add_common = [](CLI::App* sub, KeyFlags& flags, std::initializer_list<const char*> keys) {
    for (const char* k : keys) flags.add(sub, k, std::string("override config key ") + k);
  };

  // acim
  KeyFlags acim_flags;
  double acim_t = 0.0;
  std::string acim_method = "ulam", acim_out;
  std::optional<double> acim_x0;
  auto* acim = app.add_subcommand("acim", "estimate the acim of one tent map");
  acim->add_option("--t", acim_t, "slope in (1,2]")->required();
  acim->add_option("--method", acim_method, "ulam | birkhoff | markov")
      ->check(CLI::IsMember({"ulam", "birkhoff", "markov"}));
  acim->add_option("--x0", acim_x0, "Birkhoff initial point (default: uniform from seed)");
  acim->add_option("--out", acim_out, "density CSV (default <out_dir>/acim.csv)");
  add_common(acim, acim_flags, {"bins", "tol", "maxiter", "seed", "orbit", "burnin", "out_dir"});

  // sweep
  KeyFlags sweep_flags;
  std::string sweep_side = "both", sweep_out, sweep_summary;
  bool sweep_no_birkhoff = false;
  auto* sweep = app.add_subcommand("sweep", "acim statistical-stability sweep around t*");
  sweep->add_option("--side", sweep_side, "below | above | both")->check(CLI::IsMember({"below", "above", "both"}));
  sweep->add_flag("--no-birkhoff", sweep_no_birkhoff, "Ulam only");
  sweep->add_option("--out", sweep_out, "report CSV (default <out_dir>/sweep.csv)");
  sweep->add_option("--summary", sweep_summary, "summary text (default <out_dir>/sweep.txt)");
  add_common(sweep, sweep_flags, {"tstar", "kmin", "kmax", "bins", "tol", "maxiter", "orbit", "burnin", "seed",
                                  "workers", "out_dir"});

  // cylinder
  KeyFlags cyl_flags;
  std::string cyl_spec, cyl_out, cyl_summary;
  std::size_t cyl_count = 20;
  std::optional<std::uint64_t> cyl_set_seed;
  auto* cyl = app.add_subcommand("cylinder", "weak continuity of induced measures on cylinder sets");
  cyl->add_option("--spec", cyl_spec, "cylinder-set file ([[term]] blocks); default: random sets");
  cyl->add_option("--count", cyl_count, "number of random sets")->check(CLI::PositiveNumber);
  cyl->add_option("--set-seed", cyl_set_seed, "seed for random sets (default: seed)");
  cyl->add_option("--out", cyl_out, "report CSV (default <out_dir>/cylinder.csv)");
  cyl->add_option("--summary", cyl_summary, "summary text (default <out_dir>/cylinder.txt)");
  add_common(cyl, cyl_flags, {"tstar", "kmin", "kmax", "bins", "tol", "maxiter", "orbit", "depth", "burnin", "seed",
                              "workers", "out_dir"});

  // physicality
  KeyFlags phys_flags;
  double phys_t = 1.8, phys_smin = 0.0, phys_smax = 1e300, phys_pass = 0.99;
  std::string phys_basin = "collar", phys_out, phys_summary;
  auto* phys = app.add_subcommand("physicality", "Birkhoff averages from a basin vs the inverse-limit measure");
  phys->add_option("--t", phys_t, "slope in (1,2]");
  phys->add_option("--basin", phys_basin, "interval | collar | annulus")
      ->check(CLI::IsMember({"interval", "collar", "annulus"}));
  phys->add_option("--s-min", phys_smin, "annulus basin: lower s bound");
  phys->add_option("--s-max", phys_smax, "annulus basin: upper s bound");
  phys->add_option("--pass-fraction", phys_pass, "required share of samples within eps");
  phys->add_option("--out", phys_out, "report CSV (default <out_dir>/physicality.csv)");
  phys->add_option("--summary", phys_summary, "summary text (default <out_dir>/physicality.txt)");
  add_common(phys, phys_flags, {"samples", "orbit", "eps", "seed", "reference_orbit", "workers", "out_dir"});

  // psi-check
  KeyFlags psi_flags;
  double psi_smax = 6.0;
  bool psi_pushforward = false;
  std::string psi_out, psi_summary;
  auto* psic = app.add_subcommand("psi-check", "bijectivity and conjugacy of the annulus parameterization");
  psic->add_option("--s-max", psi_smax, "upper end of the s >= 1 stratum");
  psic->add_flag("--pushforward", psi_pushforward, "also sweep pushforwards of m around t*");
  psic->add_option("--out", psi_out, "report CSV (default <out_dir>/psi_check.csv)");
  psic->add_option("--summary", psi_summary, "summary text (default <out_dir>/psi_check.txt)");
  add_common(psic, psi_flags, {"samples", "depth", "seed", "tstar", "kmin", "kmax", "workers", "out_dir"});

  // render
  KeyFlags render_flags;
  std::string render_what, render_png, render_csv, render_report, render_x = "t", render_y = "w1_ulam",
                                                                   render_threads;
  double render_t = 1.8, render_y0 = 0.7, render_s0 = 0.1;
  int render_steps = 200;
  bool render_log = false;
  auto* rend = app.add_subcommand("render", "PNG + CSV renderings");
  rend->add_option("--what", render_what, "acim | delay | disk_orbit | sweep_curves")
      ->required()
      ->check(CLI::IsMember({"acim", "delay", "disk_orbit", "sweep_curves"}));
  rend->add_option("--t", render_t, "slope in (1,2]");
  rend->add_option("--y0", render_y0, "disk_orbit: start angle");
  rend->add_option("--s0", render_s0, "disk_orbit: start depth in [0,1]");
  rend->add_option("--steps", render_steps, "disk_orbit: iterations")->check(CLI::NonNegativeNumber);
  rend->add_option("--report", render_report, "sweep_curves: report CSV to plot");
  rend->add_option("--x-column", render_x, "sweep_curves: x column");
  rend->add_option("--y-columns", render_y, "sweep_curves: comma-separated y columns");
  rend->add_flag("--log-y", render_log, "sweep_curves: log10 y axis");
  rend->add_option("--threads-csv", render_threads, "delay: also write full threads (t,x0,...) here");
  rend->add_option("--png", render_png, "image path (default <out_dir>/<what>.png)");
  rend->add_option("--csv", render_csv, "data path (default <out_dir>/<what>.csv)");
  add_common(rend, render_flags, {"bins", "samples", "seed", "depth", "out_dir"});

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
    return kExitUsage;
  }

  try {
    Config cfg = config_path.empty() ? Config() : load_config(config_path);
    if (*acim) {
      acim_flags.apply(cfg);
      const TentMap map(acim_t);
      const auto bins = static_cast<std::size_t>(cfg.integer("bins"));
      Density d;
      std::vector<std::pair<std::string, std::string>> extra{{"t", format_double(acim_t)}, {"method", acim_method}};
      if (acim_method == "ulam") {
        const auto res = stationary_solve(ulam_operator(map, bins), cfg.real("tol"),
                                          static_cast<int>(cfg.integer("maxiter")));
        d = res.density;
        out << "ulam: iterations=" << res.iterations << " residual=" << format_double(res.residual) << '\n';
      } else if (acim_method == "birkhoff") {
        BirkhoffParams bp;
        bp.x0 = acim_x0;
        bp.n = cfg.integer("orbit");
        bp.nbins = bins;
        bp.burnin = cfg.integer("burnin");
        bp.seed = cfg.seed();
        if (acim_x0) extra.push_back({"x0", format_double(*acim_x0)});
        d = birkhoff_histogram(map, bp);
      } else {
        d = markov_exact_density(map, bins);
      }
      const std::string path = output_path(cfg, acim_out, "acim.csv");
      write_file(path, render_to_string([&](std::ostream& os) {
                   write_density_csv(os, d, header_lines("acim", cfg, extra));
                 }));
      out << "wrote " << path << " (integral " << format_double(d.integral()) << ")\n";
      return kExitOk;
    }
    if (*sweep) {
      sweep_flags.apply(cfg);
      const double t_star = cfg.real("tstar");
      const auto grid = dyadic_grid(t_star, static_cast<int>(cfg.integer("kmin")),
                                    static_cast<int>(cfg.integer("kmax")), sweep_side != "above",
                                    sweep_side != "below");
      AcimSweepParams p;
      p.bins = static_cast<std::size_t>(cfg.integer("bins"));
      p.tol = cfg.real("tol");
      p.maxiter = static_cast<int>(cfg.integer("maxiter"));
      p.birkhoff_n = cfg.integer("orbit");
      p.burnin = cfg.integer("burnin");
      p.seed = cfg.seed();
      p.with_birkhoff = !sweep_no_birkhoff;
      p.workers = cfg.workers();
      SweepReport rep = acim_sweep(grid, t_star, p);
      prepend_header(rep, "sweep", cfg);
      write_file(output_path(cfg, sweep_out, "sweep.csv"), render_to_string([&](auto& os) { rep.write_csv(os); }));
      write_file(output_path(cfg, sweep_summary, "sweep.txt"),
                 render_to_string([&](auto& os) { rep.write_summary(os); }));
      rep.write_summary(out);
      return rep.passed() ? kExitOk : kExitCheckFailed;
    }
    if (*cyl) {
      cyl_flags.apply(cfg);
      const double t_star = cfg.real("tstar");
      std::vector<CylinderSet> sets;
      if (!cyl_spec.empty()) {
        std::ifstream in(cyl_spec);
        if (!in) throw IoError("cannot read cylinder-set file '" + cyl_spec + "'");
        sets.push_back(parse_cylinder_set(in));
      } else {
        sets = random_cylinder_sets(cyl_set_seed.value_or(cfg.seed()), cyl_count, t_star);
      }
      const auto grid = dyadic_grid(t_star, static_cast<int>(cfg.integer("kmin")),
                                    static_cast<int>(cfg.integer("kmax")), true, true);
      CylinderContinuityParams p;
      p.bins = static_cast<std::size_t>(cfg.integer("bins"));
      p.tol = cfg.real("tol");
      p.maxiter = static_cast<int>(cfg.integer("maxiter"));
      p.sampler.orbit_length = cfg.integer("orbit");
      p.sampler.depth = static_cast<int>(cfg.integer("depth"));
      p.sampler.burnin = cfg.integer("burnin");
      p.sampler.seed = cfg.seed();
      p.workers = cfg.workers();
      SweepReport rep = cylinder_continuity(sets, grid, t_star, p);
      prepend_header(rep, "cylinder", cfg);
      if (!cyl_spec.empty()) rep.params.push_back({"spec", cyl_spec});
      write_file(output_path(cfg, cyl_out, "cylinder.csv"), render_to_string([&](auto& os) { rep.write_csv(os); }));
      write_file(output_path(cfg, cyl_summary, "cylinder.txt"),
                 render_to_string([&](auto& os) { rep.write_summary(os); }));
      rep.write_summary(out);
      return rep.passed() ? kExitOk : kExitCheckFailed;
    }
    if (*phys) {
      phys_flags.apply(cfg);
      const TentMap map(phys_t);
      PhysicalityParams p;
      p.basin = {parse_basin(phys_basin), phys_smin, phys_smax};
      p.samples = samples_or(cfg, 500);
      p.orbit = cfg.integer("orbit");
      p.eps = cfg.real("eps");
      p.seed = cfg.seed();
      p.reference_orbit = cfg.integer("reference_orbit");
      p.pass_fraction = phys_pass;
      p.workers = cfg.workers();
      PhysicalityReport res = physicality_test(map, ObservableBank::standard().lipschitz_normalized(), p);
      prepend_header(res.report, "physicality", cfg);
      write_file(output_path(cfg, phys_out, "physicality.csv"),
                 render_to_string([&](auto& os) { res.report.write_csv(os); }));
      write_file(output_path(cfg, phys_summary, "physicality.txt"),
                 render_to_string([&](auto& os) { res.report.write_summary(os); }));
      res.report.write_summary(out);
      return res.report.passed() ? kExitOk : kExitCheckFailed;
    }
    if (*psic) {
      psi_flags.apply(cfg);
      ConjugacyParams p;
      p.samples = samples_or(cfg, 10000);
      p.depth = static_cast<int>(cfg.integer("depth"));
      p.seed = cfg.seed();
      p.s_max = psi_smax;
      p.workers = cfg.workers();
      SweepReport rep = psi_conjugacy_check(p);
      prepend_header(rep, "psi-check", cfg);
      bool ok = rep.passed();
      std::string csv = render_to_string([&](auto& os) { rep.write_csv(os); });
      std::string summary = render_to_string([&](auto& os) { rep.write_summary(os); });
      if (psi_pushforward) {
        const double t_star = cfg.real("tstar");
        PsiContinuityParams q;
        q.depth = p.depth;
        q.samples = p.samples;
        q.seed = p.seed;
        q.workers = p.workers;
        SweepReport push = psi_pushforward_continuity(
            dyadic_grid(t_star, static_cast<int>(cfg.integer("kmin")), static_cast<int>(cfg.integer("kmax")), true,
                        true),
            t_star, ObservableBank::standard().lipschitz_normalized(), q);
        prepend_header(push, "psi-check", cfg);
        ok = ok && push.passed();
        csv += render_to_string([&](auto& os) { push.write_csv(os); });
        summary += render_to_string([&](auto& os) { push.write_summary(os); });
      }
      write_file(output_path(cfg, psi_out, "psi_check.csv"), csv);
      write_file(output_path(cfg, psi_summary, "psi_check.txt"), summary);
      out << summary;
      return ok ? kExitOk : kExitCheckFailed;
    }
    if (*rend) {
      render_flags.apply(cfg);
      Rendering r{Image(1, 1), {}};
      if (render_what == "acim") {
        r = render_acim(TentMap(render_t), static_cast<std::size_t>(cfg.integer("bins")));
      } else if (render_what == "delay") {
        const TentMap map(render_t);
        const auto n = static_cast<std::int64_t>(samples_or(cfg, 100000));
        r = render_delay(map, n, cfg.seed());
        if (!render_threads.empty()) {
          ThreadSamplerParams sp;
          sp.depth = static_cast<int>(cfg.integer("depth"));
          sp.burnin = 1000;
          sp.orbit_length = n + sp.burnin + sp.depth - 1;
          sp.seed = cfg.seed();
          ThreadSampler sampler(map, sp);
          std::vector<Thread> threads;
          Thread th;
          while (sampler.next(th)) threads.push_back(th);
          write_file(render_threads, render_to_string([&](std::ostream& os) {
                       write_threads_csv(os, threads,
                                         header_lines("render-threads", cfg, {{"t", format_double(render_t)}}));
                     }));
        }
      } else if (render_what == "disk_orbit") {
        if (!(render_s0 >= 0.0 && render_s0 <= 1.0)) throw DomainError("--s0 must lie in [0,1]");
        r = render_disk_orbit(TentMap(render_t), {render_y0, render_s0}, render_steps, cfg.seed());
      } else {
        if (render_report.empty()) throw DomainError("sweep_curves needs --report");
        std::ifstream in(render_report);
        if (!in) throw IoError("cannot read report '" + render_report + "'");
        const SweepReport rep = read_report_csv(in);
        r = render_sweep_curves(rep, render_x, split_commas(render_y), render_log);
      }
      const std::string png = output_path(cfg, render_png, render_what + ".png");
      const std::string csv = output_path(cfg, render_csv, render_what + ".csv");
      write_file(csv, r.csv);
      try {
        write_png(png, r.image);
      } catch (const std::runtime_error& e) {
        throw IoError(e.what());
      }
      out << "wrote " << png << " and " << csv << '\n';
      return kExitOk;
    }
  } catch (const ConvergenceError& e) {
    err << "check failed: " << e.what() << '\n';
    return kExitCheckFailed;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NotMarkovError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ShapeMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  err << app.help();
  return kExitUsage;
}

int run_command(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args, std::cout, std::cerr);
}

}  // namespace tentlab
