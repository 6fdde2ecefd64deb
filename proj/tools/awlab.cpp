// awlab: numerical laboratory for a family of ITPFI2 factors parameterized
// over c_0, their Connes T-set diagnostics, equivalence bounds, local-orbit
// chain witnesses, and the associated odometer dynamics.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "awlab/json_io.hpp"
#include "awlab/run_config.hpp"

namespace {

using awlab::ordered_json;

// Malformed command input (unreadable or unparsable files): exit status 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ordered_json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

awlab::ParamSequence load_sequence(const std::string& spec) {
  if (spec == "zero") return awlab::ParamSequence::zero();
  ordered_json doc = load_json_file(spec);
  try {
    return awlab::param_sequence_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(spec + ": " + e.what());
  }
}

// Either a plain sequence or a perturbed-sequence document.
struct SequenceInput {
  bool perturbed = false;
  awlab::ParamSequence plain;
  awlab::PerturbedSequence pert;
};

SequenceInput load_sequence_any(const std::string& spec) {
  SequenceInput s;
  if (spec == "zero") {
    s.plain = awlab::ParamSequence::zero();
    return s;
  }
  ordered_json doc = load_json_file(spec);
  try {
    if (doc.is_object() && doc.value("kind", "") == "perturbed") {
      s.perturbed = true;
      s.pert = awlab::perturbed_from_json(doc);
    } else {
      s.plain = awlab::param_sequence_from_json(doc);
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(spec + ": " + e.what());
  }
  return s;
}

awlab::GVector load_gvector(const std::string& spec) {
  if (spec == "zero") return awlab::GVector::zero();
  ordered_json doc = load_json_file(spec);
  try {
    return awlab::gvector_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(spec + ": " + e.what());
  }
}

awlab::ScalarExpr parse_t(const std::string& text) {
  try {
    return awlab::ScalarExpr::parse(text);
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad scalar: ") + e.what());
  }
}

mpq_class parse_rat_arg(const std::string& text, const char* what) {
  try {
    return awlab::parse_rational(text);
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad ") + what + ": " + e.what());
  }
}

void emit(const awlab::RunConfig& cfg, const std::string& payload) {
  if (cfg.out.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(cfg.out, std::ios::binary);
  if (!out) throw UsageError("cannot write " + cfg.out);
  out << payload;
}

std::string dumps(const ordered_json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "awlab: T-set diagnostics, equivalence bounds, turbulence chains and "
      "odometer dynamics for a c_0-parameterized family of ITPFI2 factors"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  awlab::RunConfig cfg;
  std::string config_path;
  long flag_ceiling = cfg.precision_ceiling_bits;
  double flag_target = cfg.target_err;
  unsigned flag_workers = cfg.workers;
  std::string flag_format = cfg.format;
  std::string flag_out;

  auto* opt_config = app.add_option("--config", config_path,
                                    "JSON config file with RunConfig fields");
  auto* opt_ceiling = app.add_option("--precision-ceiling", flag_ceiling,
                                     "working precision ceiling in bits");
  auto* opt_target =
      app.add_option("--target-err", flag_target, "default residue error target");
  auto* opt_workers =
      app.add_option("--workers", flag_workers, "worker threads for per-term evaluation");
  auto* opt_format = app.add_option("--format", flag_format, "output format: json or csv");
  auto* opt_out = app.add_option("--out", flag_out, "output path (default stdout)");

  // ---- subcommand argument storage ----
  std::string arg_x = "zero", arg_x2 = "zero", arg_y = "zero", arg_g, arg_t = "1";
  std::string arg_center = "zero", arg_word, arg_z, arg_eps = "1/10";
  std::string arg_radius_sup = "1", arg_radius_g = "1";
  unsigned long arg_J = 40, arg_nmax = 12;
  long arg_steps = 1;
  bool arg_allow_wrap = false;

  auto* cmd_tset = app.add_subcommand("tset-diagnose",
                                      "T-set membership series with verdict");
  cmd_tset->add_option("--x", arg_x, "parameter sequence file, or 'zero'");
  cmd_tset->add_option("--t", arg_t, "scalar: rational/decimal or pi, ln2, 2pi/ln2, e");
  cmd_tset->add_option("--J", arg_J, "horizon")->required();

  auto* cmd_construct = app.add_subcommand("construct-t",
                                           "build t with membership evidence");
  cmd_construct->add_option("--x", arg_x, "parameter sequence file, or 'zero'");
  cmd_construct->add_option("--J", arg_J, "horizon")->required();

  auto* cmd_perturb = app.add_subcommand(
      "perturb", "divergence-forcing perturbation of a sequence");
  cmd_perturb->add_option("--y", arg_y, "base sequence file, or 'zero'");
  cmd_perturb->add_option("--t", arg_t, "scalar to force out of the T-set")->required();
  cmd_perturb->add_option("--eps", arg_eps, "sup-norm budget (rational)");
  cmd_perturb->add_option("--J", arg_J, "horizon")->required();

  auto* cmd_aw = app.add_subcommand("aw-equiv",
                                    "Araki-Woods equivalence criterion sum");
  cmd_aw->add_option("--x", arg_x, "first sequence");
  cmd_aw->add_option("--x2", arg_x2, "second sequence")->required();
  cmd_aw->add_option("--J", arg_J, "horizon")->required();

  auto* cmd_gnorm = app.add_subcommand("g-norm", "weighted G-norm square");
  cmd_gnorm->add_option("--g", arg_g, "G-vector file")->required();
  cmd_gnorm->add_option("--J", arg_J, "horizon")->required();

  auto* cmd_orbit = app.add_subcommand(
      "orbit-bound", "orbit-preservation bound: AW sum vs quadratic majorant");
  cmd_orbit->add_option("--x", arg_x, "base sequence");
  cmd_orbit->add_option("--g", arg_g, "G-vector file")->required();
  cmd_orbit->add_option("--J", arg_J, "horizon")->required();

  auto* cmd_chain = app.add_subcommand("chain", "local-orbit chain witness");
  cmd_chain->add_option("--x", arg_x, "start sequence");
  cmd_chain->add_option("--g", arg_g, "G-vector file")->required();
  cmd_chain->add_option("--center", arg_center, "center of the sup-norm ball U");
  cmd_chain->add_option("--radius-sup", arg_radius_sup, "radius of U (rational)");
  cmd_chain->add_option("--radius-g", arg_radius_g, "radius of V in G (rational)");

  auto* cmd_dense = app.add_subcommand("dense-approx",
                                       "exact G-vector moving x onto y");
  cmd_dense->add_option("--x", arg_x, "start sequence");
  cmd_dense->add_option("--y", arg_y, "target sequence")->required();
  cmd_dense->add_option("--eps", arg_eps, "tolerance (rational)");

  auto* cmd_odo = app.add_subcommand("odometer", "orbit segment with cocycles");
  cmd_odo->add_option("--word", arg_word, "start word, e.g. 0110")->required();
  cmd_odo->add_option("--steps", arg_steps, "number of steps (may be negative)");
  cmd_odo->add_option("--x", arg_x, "sequence whose eigenvalue list feeds the measure");
  cmd_odo->add_option("--z", arg_z, "explicit rational measure file (overrides --x)");
  cmd_odo->add_flag("--allow-wrap", arg_allow_wrap, "permit crossing the all-ones wrap");

  auto* cmd_t3 = app.add_subcommand("type-iii", "type III divergence evidence");
  cmd_t3->add_option("--x", arg_x, "parameter sequence");
  cmd_t3->add_option("--J", arg_J, "horizon")->required();

  auto* cmd_export = app.add_subcommand("export-measure",
                                        "product measure z_x(n) = lambda_n^x");
  cmd_export->add_option("--x", arg_x, "parameter sequence");
  cmd_export->add_option("--n-max", arg_nmax, "coordinate count")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*opt_config) cfg.apply_json(load_json_file(config_path));
    if (*opt_ceiling) cfg.precision_ceiling_bits = flag_ceiling;
    if (*opt_target) cfg.target_err = flag_target;
    if (*opt_workers) cfg.workers = flag_workers;
    if (*opt_format) cfg.format = flag_format;
    if (*opt_out) cfg.out = flag_out;
    cfg.validate();

    const awlab::TsetOptions topt = cfg.tset_options();
    const awlab::EquivPolicy epol = cfg.equiv_policy();

    if (*cmd_tset) {
      auto xin = load_sequence_any(arg_x);
      awlab::SeriesDiagnostics d;
      if (xin.perturbed) {
        d = awlab::tset_diagnose(xin.pert, arg_J, cfg.policy, topt);
      } else {
        auto t = parse_t(arg_t);
        d = awlab::tset_diagnose(xin.plain, t.provider(), arg_J, cfg.policy, topt);
      }
      if (cfg.format == "csv") {
        emit(cfg, awlab::csv_of(d));
      } else {
        ordered_json o;
        o["command"] = "tset-diagnose";
        o["x"] = arg_x;
        o["t"] = xin.perturbed ? xin.pert.t.describe() : parse_t(arg_t).describe();
        o["diagnostics"] = awlab::json_of(d);
        emit(cfg, dumps(o));
      }
      return 0;
    }

    if (*cmd_construct) {
      auto x = load_sequence(arg_x);
      auto trace = awlab::construct_t(x, arg_J, topt);
      auto checks = awlab::verify_construction(x, trace, topt);
      ordered_json o;
      o["command"] = "construct-t";
      o["x"] = arg_x;
      o["trace"] = awlab::json_of(trace, checks);
      emit(cfg, dumps(o));
      return 0;
    }

    if (*cmd_perturb) {
      auto y = load_sequence(arg_y);
      auto t = parse_t(arg_t);
      mpq_class eps = parse_rat_arg(arg_eps, "eps");
      std::vector<awlab::PerturbCheck> checks;
      auto p = awlab::perturb_for_divergence(y, t, eps, arg_J, topt, &checks);
      auto d = awlab::tset_diagnose(p, arg_J, cfg.policy, topt);
      ordered_json o = awlab::json_of(p, checks);
      o["diagnostics"] = awlab::json_of(d);
      emit(cfg, dumps(o));
      return 0;
    }

    if (*cmd_aw) {
      auto x = load_sequence(arg_x);
      auto x2 = load_sequence(arg_x2);
      auto rep = awlab::aw_partial_sum(x, x2, arg_J, epol, cfg.workers);
      if (cfg.format == "csv") {
        emit(cfg, awlab::csv_of(rep));
      } else {
        ordered_json o;
        o["command"] = "aw-equiv";
        o["report"] = awlab::json_of(rep);
        emit(cfg, dumps(o));
      }
      return 0;
    }

    if (*cmd_gnorm) {
      auto g = load_gvector(arg_g);
      auto n = awlab::g_norm_sq(g, arg_J, epol);
      ordered_json o;
      o["command"] = "g-norm";
      o["J"] = arg_J;
      o["g_norm_sq"] = awlab::json_of(n, 30);
      emit(cfg, dumps(o));
      return 0;
    }

    if (*cmd_orbit) {
      auto x = load_sequence(arg_x);
      auto g = load_gvector(arg_g);
      auto rep = awlab::orbit_bound_check(x, g, arg_J, epol, cfg.workers);
      if (cfg.format == "csv") {
        emit(cfg, awlab::csv_of(rep));
      } else {
        ordered_json o;
        o["command"] = "orbit-bound";
        o["report"] = awlab::json_of(rep);
        emit(cfg, dumps(o));
      }
      return 0;
    }

    if (*cmd_chain) {
      auto x = load_sequence(arg_x);
      auto g = load_gvector(arg_g);
      awlab::SupBall U{load_sequence(arg_center),
                       parse_rat_arg(arg_radius_sup, "radius-sup")};
      mpq_class rv = parse_rat_arg(arg_radius_g, "radius-g");
      auto w = awlab::chain_witness(x, g, U, rv);
      ordered_json o;
      o["command"] = "chain";
      o["witness"] = awlab::json_of(w);
      emit(cfg, dumps(o));
      return 0;
    }

    if (*cmd_dense) {
      auto x = load_sequence(arg_x);
      auto y = load_sequence(arg_y);
      auto g = awlab::dense_approximant(x, y, parse_rat_arg(arg_eps, "eps"));
      ordered_json o;
      o["command"] = "dense-approx";
      o["g"] = awlab::json_of(g);
      o["achieved_sup_distance"] = "0";
      emit(cfg, dumps(o));
      return 0;
    }

    if (*cmd_odo) {
      auto w = awlab::BitWord::parse(arg_word);
      ordered_json o;
      o["command"] = "odometer";
      o["word"] = arg_word;
      o["steps"] = arg_steps;
      ordered_json orbit = ordered_json::array();
      if (!arg_z.empty()) {
        auto z = awlab::rational_measure_from_json(load_json_file(arg_z));
        o["measure"] = "file:" + arg_z;
        awlab::BitWord cur = w;
        long dir = arg_steps >= 0 ? 1 : -1;
        for (long s = 0; s != arg_steps + dir; s += dir) {
          ordered_json row;
          row["step"] = s;
          row["word"] = cur.to_string();
          row["cocycle"] =
              awlab::rational_to_string(awlab::rn_cocycle(z, w, s, arg_allow_wrap));
          orbit.push_back(row);
          if (s != arg_steps) {
            cur = (dir > 0 ? awlab::odometer_step(cur)
                           : awlab::odometer_step_back(cur))
                      .first;
          }
        }
      } else {
        auto m = awlab::eigenvalues_to_measure(load_sequence(arg_x), w.size(),
                                               cfg.nmax_cap);
        o["measure"] = awlab::json_of(m);
        awlab::BitWord cur = w;
        long dir = arg_steps >= 0 ? 1 : -1;
        for (long s = 0; s != arg_steps + dir; s += dir) {
          ordered_json row;
          row["step"] = s;
          row["word"] = cur.to_string();
          if (m.is_exact()) {
            row["cocycle"] = awlab::rational_to_string(
                awlab::rn_cocycle(m.rationals(), w, s, arg_allow_wrap));
          } else {
            row["cocycle"] = awlab::json_of(
                awlab::rn_cocycle(m.ball_values(), w, s, arg_allow_wrap), 30);
          }
          orbit.push_back(row);
          if (s != arg_steps) {
            cur = (dir > 0 ? awlab::odometer_step(cur)
                           : awlab::odometer_step_back(cur))
                      .first;
          }
        }
      }
      o["orbit"] = orbit;
      o["ergodicity"] =
          "assumed by citation: the product measure is non-atomic and ergodic "
          "for the odometer; finite-level computation does not certify this";
      emit(cfg, dumps(o));
      return 0;
    }

    if (*cmd_t3) {
      auto rep = awlab::type_iii_evidence(load_sequence(arg_x), arg_J);
      ordered_json o;
      o["command"] = "type-iii";
      o["report"] = awlab::json_of(rep);
      emit(cfg, dumps(o));
      return 0;
    }

    if (*cmd_export) {
      auto m = awlab::eigenvalues_to_measure(load_sequence(arg_x), arg_nmax,
                                             cfg.nmax_cap);
      ordered_json o;
      o["command"] = "export-measure";
      o["n_max"] = arg_nmax;
      o["measure"] = awlab::json_of(m);
      emit(cfg, dumps(o));
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const awlab::PrecisionExhausted& e) {
    std::cerr << "precision exhausted: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
