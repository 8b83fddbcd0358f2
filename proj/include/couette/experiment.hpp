#pragma once

// Experiment runner: builds initial data, drives the solvers, and writes
// diagnostics.csv, snapshots/, probe.csv, config.yaml and summary.txt into the
// output directory. Every number is printed with %.17g and every reduction
// runs in a fixed order, so identical configurations give identical bytes.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "couette/catalog.hpp"
#include "couette/config.hpp"
#include "couette/diagnostics.hpp"
#include "couette/fokker_planck.hpp"
#include "couette/linear_propagator.hpp"
#include "couette/selfsim.hpp"
#include "couette/snapshot.hpp"

namespace couette {

inline constexpr const char* kOutputDirEnv = "COUETTE_OUTPUT_DIR";

/// Process exit status for an exception escaping run_experiment.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DivergenceError*>(&e) || dynamic_cast<const NoConvergenceError*>(&e)) return 3;
  if (dynamic_cast<const ResolutionError*>(&e) || dynamic_cast<const AliasingError*>(&e) ||
      dynamic_cast<const TruncationError*>(&e) || dynamic_cast<const InterpolationAccuracyError*>(&e))
    return 4;
  return 1;
}

/// output_dir from the config, else $COUETTE_OUTPUT_DIR, else "couette_out".
inline std::string resolve_output_dir(const RunConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "couette_out";
}

/// t_init * 10^(k / per_decade) up to t_end, with t_end appended.
inline std::vector<double> log_sample_times(double t_init, double t_end, int per_decade) {
  std::vector<double> ts;
  for (int k = 0;; ++k) {
    const double t = t_init * std::pow(10.0, static_cast<double>(k) / per_decade);
    if (t >= t_end * (1.0 - 1e-12)) break;
    ts.push_back(t);
  }
  ts.push_back(t_end);
  return ts;
}

inline std::vector<std::string> csv_columns(const std::vector<double>& weights) {
  std::vector<std::string> cols{"t", "tau", "mass", "L1", "L43", "L2", "Linf"};
  for (double m : weights) cols.push_back("conv_L2m_" + detail::fmt(m));
  cols.insert(cols.end(), {"conv_L1_phys", "E", "D"});
  return cols;
}

namespace detail {

inline std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& p, std::vector<double> weights) : out_(p, std::ios::trunc), weights_(std::move(weights)) {
    if (!out_) throw Error("cannot open " + p.string() + " for writing");
    out_ << join(csv_columns(weights_), ",") << "\n";
    out_.flush();
  }
  void write(const DiagnosticsRecord& r) {
    std::vector<std::string> f{fmt(r.t), fmt(r.tau), fmt(r.mass), fmt(r.lp_norms.at(1.0)), fmt(r.lp_norms.at(4.0 / 3.0)),
                               fmt(r.lp_norms.at(2.0)), fmt(r.lp_norms.at(kInf))};
    for (double m : weights_) f.push_back(fmt(r.convergence_L2m.at(m)));
    f.push_back(fmt(r.convergence_L1_phys));
    f.push_back(r.energy ? fmt(r.energy->E) : "nan");
    f.push_back(r.energy ? fmt(r.energy->D) : "nan");
    out_ << join(f, ",") << "\n";
    out_.flush();
  }

 private:
  std::ofstream out_;
  std::vector<double> weights_;
};

// Ordered key/value lines of summary.txt.
class Summary {
 public:
  void add(const std::string& k, const std::string& v) { lines_.push_back(k + ": " + v); }
  void add(const std::string& k, double v) { add(k, fmt(v)); }
  void write(const std::filesystem::path& p) const {
    std::ofstream out(p, std::ios::trunc);
    for (const auto& l : lines_) out << l << "\n";
  }

 private:
  std::vector<std::string> lines_;
};

using Series = std::vector<std::pair<double, double>>;

// Fits over every window [10^i t_init, 10^j t_init] and over the last decade.
inline void add_fits(Summary& s, const std::string& name, const Series& series, double t_init, double t_end) {
  std::vector<double> edges;
  for (double e = t_init; e <= t_end * (1 + 1e-12); e *= 10.0) edges.push_back(e);
  std::vector<std::pair<double, double>> windows;
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (std::size_t j = i + 1; j < edges.size(); ++j) windows.push_back({edges[i], edges[j]});
  if (t_end / 10.0 >= t_init * (1 - 1e-12) && (edges.empty() || std::abs(edges.back() - t_end) > 1e-9 * t_end))
    windows.push_back({t_end / 10.0, t_end});
  for (const auto& [a, b] : windows) {
    Series pos;
    for (const auto& p : series)
      if (p.second > 0.0) pos.push_back(p);
    try {
      const RateFit f = rate_fit(pos, a * (1 - 1e-12), b * (1 + 1e-12));
      s.add("fit." + name + ".[" + fmt(a) + "," + fmt(b) + "]",
            fmt(f.slope) + " +- " + fmt(f.stderr_) + " (" + std::to_string(f.samples) + " samples)");
    } catch (const FitError&) {
    }
  }
}

// Earliest sample after which the series never increases.
inline double onset_time(const Series& s) {
  if (s.empty()) return std::nan("");
  std::size_t k = s.size() - 1;
  while (k > 0 && s[k - 1].second >= s[k].second) --k;
  return s[k].first;
}

inline std::string snapshot_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%04d", index);
  return buf;
}

}  // namespace detail

/// Runs one experiment. On a solver failure the outputs written so far are
/// kept, summary.txt records status "failed" with the message, and the
/// exception is rethrown for the caller to map to an exit status.
inline void run_experiment(const RunConfig& cfg, std::ostream* log = nullptr) {
  validate(cfg);
  namespace fs = std::filesystem;
  const fs::path out = resolve_output_dir(cfg);
  fs::create_directories(out);
  {
    std::ofstream c(out / "config.yaml", std::ios::trunc);
    c << serialize(cfg);
  }
  detail::Summary sum;
  sum.add("mode", to_string(cfg.mode));
  sum.add("initial_data", cfg.initial_data.kind);
  sum.add("seed", std::to_string(cfg.seed));
  auto say = [&](const std::string& m) {
    if (log) *log << m << std::endl;
  };

  RecordOptions ro;
  ro.convergence_m = cfg.weights;
  for (double m : cfg.weights) ro.weighted.push_back({m, 0, 0});
  if (cfg.energy) ro.energy = EnergyCoefficients::from_scale(cfg.energy_scale, cfg.t_init, cfg.weights.front());

  detail::Series linf, l2;
  std::vector<detail::Series> conv(cfg.weights.size()), wn(cfg.weights.size());
  auto track = [&](const DiagnosticsRecord& r) {
    linf.push_back({r.t, r.lp_norms.at(kInf)});
    l2.push_back({r.t, r.lp_norms.at(2.0)});
    for (std::size_t i = 0; i < cfg.weights.size(); ++i) {
      conv[i].push_back({r.t, r.convergence_L2m.at(cfg.weights[i])});
      wn[i].push_back({r.t, r.weighted.at({cfg.weights[i], 0, 0})});
    }
  };
  auto add_all_fits = [&](double t0, double t1) {
    detail::add_fits(sum, "Linf", linf, t0, t1);
    detail::add_fits(sum, "L2", l2, t0, t1);
    for (std::size_t i = 0; i < cfg.weights.size(); ++i) {
      const std::string m = detail::fmt(cfg.weights[i]);
      detail::add_fits(sum, "L2m_" + m, wn[i], t0, t1);
      detail::add_fits(sum, "conv_L2m_" + m, conv[i], t0, t1);
      sum.add("onset.conv_L2m_" + m, detail::onset_time(conv[i]));
    }
  };
  auto fail = [&](const std::exception& e) {
    sum.add("status", "failed");
    sum.add("exit_code", std::to_string(exit_code_for(e)));
    sum.add("error", e.what());
    sum.add("partial_output", "true");
    sum.write(out / "summary.txt");
  };

  try {
    switch (cfg.mode) {
      case Mode::simulate:
      case Mode::linear: {
        const GridSpec g = cfg.grid();
        if (cfg.snapshots) fs::create_directories(out / "snapshots");
        const Field w0 = initial_data(cfg.initial_data, g, cfg.seed);
        const auto s0 = SelfSimilarState::from_field(w0, cfg.t_init, cfg.nu);
        sum.add("alpha", s0.alpha);
        detail::CsvWriter csv(out / "diagnostics.csv", cfg.weights);
        EvolveOptions eo;
        eo.nonlinear = cfg.mode == Mode::simulate;
        eo.step.dtau = cfg.tau_step;
        eo.step.policy = cfg.resolution_policy == "error" ? ResolutionPolicy::error : ResolutionPolicy::warn;
        eo.sample_times = log_sample_times(cfg.t_init, cfg.t_end, cfg.samples_per_decade);
        int snap = 0;
        double next_decade = cfg.t_init;
        eo.observer = [&](const SelfSimilarState& s) {
          const auto r = record(s, ro);
          csv.write(r);
          track(r);
          const bool last = s.t >= cfg.t_end * (1 - 1e-12);
          if (cfg.snapshots && (s.t >= next_decade * (1 - 1e-9) || last)) {
            write_snapshot((out / "snapshots" / detail::snapshot_name(snap++)).string(), {s.omega, s.t, s.nu, s.alpha});
            while (next_decade <= s.t * (1 + 1e-9)) next_decade *= 10.0;
          }
          say("t = " + detail::fmt(s.t));
        };
        double max_mass_drift = 0.0, max_l1_increase = 0.0, prev_l1 = lp_norm(w0, 1);
        eo.on_step = [&](const SelfSimilarState& s) {
          max_mass_drift = std::max(max_mass_drift, std::abs(mass(s.omega) / s0.alpha - 1.0));
          const double l = lp_norm(s.omega, 1);
          max_l1_increase = std::max(max_l1_increase, (l - prev_l1) / prev_l1);
          prev_l1 = l;
        };
        EvolveResult res;
        try {
          res = evolve(s0, cfg.t_end, eo);
        } catch (...) {
          add_all_fits(cfg.t_init, l2.empty() ? cfg.t_init : l2.back().first);
          throw;
        }
        sum.add("steps", std::to_string(res.steps));
        sum.add("rejected_steps", std::to_string(res.rejected));
        sum.add("final_tau_step", res.final_dtau);
        if (s0.alpha != 0.0) sum.add("max_relative_mass_drift", max_mass_drift);
        sum.add("max_relative_L1_increase_per_step", max_l1_increase);
        for (const auto& w : res.warnings) sum.add("warning", w);
        add_all_fits(cfg.t_init, cfg.t_end);
        break;
      }
      case Mode::fp_decay: {
        const GridSpec g = cfg.grid();
        const Field u0 = initial_data(cfg.initial_data, g, cfg.seed);
        const double alpha = mass(u0);
        detail::CsvWriter csv(out / "diagnostics.csv", cfg.weights);
        ro.physical_norms = false;
        ro.energy.reset();
        const double t_end = std::exp(cfg.fp_tau_end);
        for (double t : log_sample_times(1.0, t_end, cfg.samples_per_decade)) {
          const double tau = std::log(t);
          const SelfSimilarState s(fp_apply(u0, tau), t, 1.0, alpha);
          auto r = record(s, ro);
          r.tau = tau;
          csv.write(r);
          track(r);
        }
        sum.add("alpha", alpha);
        // Exponent in tau: t = e^tau, so log-log slopes are d log / d tau.
        const double a = std::min(std::exp(1.0), t_end), b = t_end;
        for (std::size_t i = 0; i < cfg.weights.size(); ++i) {
          detail::Series pos;
          for (const auto& p : conv[i])
            if (p.second > 0.0) pos.push_back(p);
          try {
            const auto f = rate_fit(pos, a * (1 - 1e-12), b * (1 + 1e-12));
            sum.add("fp_decay_exponent.conv_L2m_" + detail::fmt(cfg.weights[i]),
                    detail::fmt(f.slope) + " +- " + detail::fmt(f.stderr_));
          } catch (const FitError&) {
            sum.add("fp_decay_exponent.conv_L2m_" + detail::fmt(cfg.weights[i]), "insufficient samples");
          }
        }
        break;
      }
      case Mode::picard: {
        const GridSpec g = cfg.grid();
        const Field w0 = initial_data(cfg.initial_data, g, cfg.seed);
        const GridSpec gs = cfg.selfsim_grid();
        detail::CsvWriter csv(out / "diagnostics.csv", cfg.weights);
        const double T = cfg.t_end - cfg.t_init;
        if (!(T > 0.0)) throw ValidationError("time.t_end", "picard mode needs t_end > t_init");
        const PicardResult pr = picard_solve(w0, cfg.nu, T, cfg.picard_times, cfg.picard_max_iter, cfg.picard_tol);
        auto emit = [&](const Field& w, double t) {
          const auto r = record(phys_to_selfsim(w, t, cfg.nu, gs), ro);
          csv.write(r);
          track(r);
        };
        emit(w0, cfg.t_init);
        for (std::size_t k = 0; k < pr.trajectory.size(); ++k)
          emit(pr.trajectory.fields[k], cfg.t_init + pr.trajectory.times[k]);
        sum.add("iterations", std::to_string(pr.iterations));
        std::vector<std::string> h;
        for (double d : pr.history) h.push_back(detail::fmt(d));
        sum.add("kato_distance_history", detail::join(h, " "));
        sum.add("kato_norm", kato_norm(pr.trajectory));
        break;
      }
      case Mode::probe: {
        const GridSpec g = cfg.grid();
        std::vector<Field> ensemble;
        for (int i = 0; i < cfg.probe_ensemble; ++i)
          ensemble.push_back(initial_data(cfg.initial_data, g, cfg.seed + static_cast<std::uint64_t>(i)));
        ProbeOptions po;
        po.m = cfg.probe_m;
        po.sigma = cfg.probe_sigma;
        po.nu = cfg.nu;
        po.p = cfg.probe_p;
        po.q = cfg.probe_q;
        po.selfsim_grid = cfg.selfsim_grid();
        const ProbeId id = probe_from_string(cfg.probe_id);
        const ProbeReport rep = inequality_probe(id, ensemble, cfg.probe_times, po);
        std::ofstream csv(out / "probe.csv", std::ios::trunc);
        csv << "field,t,ratio\n";
        std::size_t k = 0;
        for (std::size_t i = 0; i < ensemble.size(); ++i)
          for (double t : cfg.probe_times) csv << i << "," << detail::fmt(t) << "," << detail::fmt(rep.ratios[k++]) << "\n";
        sum.add("probe", to_string(id));
        sum.add("probe.max", rep.max);
        sum.add("probe.mean", rep.mean);
        sum.add("probe.argmax_field", std::to_string(rep.argmax_field));
        sum.add("probe.argmax_time", rep.argmax_time);
        for (const auto& w : rep.warnings) sum.add("warning", w);
        break;
      }
    }
  } catch (const std::exception& e) {
    fail(e);
    throw;
  }
  sum.add("status", "ok");
  sum.write(out / "summary.txt");
}

}  // namespace couette
