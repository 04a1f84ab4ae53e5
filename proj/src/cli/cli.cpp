//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <ostream>
#include <typeinfo>

#include "dualfuse/chem/io.hpp"
#include "dualfuse/cli.hpp"
#include "dualfuse/dataset.hpp"
#include "dualfuse/eval.hpp"
#include "dualfuse/sample.hpp"
#include "dualfuse/train.hpp"

namespace dualfuse::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kCommands = {"derive-dataset", "train", "sample", "eval", "check-symmetry", "mock-data"};

fs::path manifest_path(const std::string &flag, const fs::path &beside) {
  if (!flag.empty()) return flag;
  return fs::path(beside.string() + ".manifest.json");
}

json read_json_file(const fs::path &p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw std::runtime_error(p.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path &p, const json &j) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw IoError("cannot write " + p.string());
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing " + p.string());
}

// Strict reader: a malformed line is an error, not a skipped row.
std::vector<json> read_rows(const fs::path &p) {
  if (!fs::is_regular_file(p)) throw IoError("cannot read " + p.string());
  std::string first_error;
  auto rows = chem::read_jsonl(p, [&](std::size_t line, const std::string &msg) {
    if (first_error.empty()) first_error = p.string() + ":" + std::to_string(line) + ": " + msg;
  });
  if (!first_error.empty()) throw std::runtime_error(first_error);
  return rows;
}

// Runs `body` between manifest begin and finish.
void with_manifest(RunManifest &m, const std::function<void()> &body) {
  m.begin();
  try {
    body();
  } catch (const std::exception &e) {
    m.finish(false, e.what());
    throw;
  }
  m.finish(true);
}

// ---- subcommands ------------------------------------------------------------

struct MockArgs {
  std::size_t ligands = 0, targets = 0;
  std::optional<std::uint64_t> seed;
  std::string out = "mock_records.jsonl", manifest;
  data::MockConfig cfg;
};

int run_mock(const MockArgs &a, const std::vector<std::string> &argv, std::ostream &out) {
  data::MockConfig cfg = a.cfg;
  cfg.ligands = a.ligands;
  cfg.targets = a.targets;
  const auto seed = resolve_seed(a.seed, 0);
  RunManifest m(manifest_path(a.manifest, a.out), "mock-data", argv);
  m.set_seed(seed);
  m.set_config({{"ligands", cfg.ligands},
                {"targets", cfg.targets},
                {"same_target_repeats", cfg.same_target_repeats},
                {"min_atoms", cfg.min_atoms},
                {"max_atoms", cfg.max_atoms},
                {"pocket_min", cfg.pocket_min},
                {"pocket_max", cfg.pocket_max},
                {"rejection_budget", cfg.rejection_budget}});
  m.add_artifact(a.out);
  with_manifest(m, [&] {
    num::Rng rng(seed);
    const auto recs = data::mock_records(cfg, rng);
    std::vector<json> rows;
    for (const auto &r : recs) rows.push_back(data::record_to_json(r));
    chem::write_jsonl(a.out, rows);
    m.set_result("records", recs.size());
    m.set_result("expected_instances", data::expected_mock_pairs(cfg));
    out << "wrote " << recs.size() << " records to " << a.out << " (expected instances: "
        << data::expected_mock_pairs(cfg) << ")\n";
  });
  return kExitOk;
}

struct DeriveArgs {
  std::string records, out, report, manifest;
  double cutoff = 10.0;
};

int run_derive(const DeriveArgs &a, const std::vector<std::string> &argv, std::ostream &out) {
  const std::string report = a.report.empty() ? a.out + ".report.json" : a.report;
  RunManifest m(manifest_path(a.manifest, a.out), "derive-dataset", argv);
  m.set_config({{"cutoff", a.cutoff}});
  m.add_input(a.records);
  m.add_artifact(a.out);
  m.add_artifact(report);
  with_manifest(m, [&] {
    std::vector<std::string> parse_errors;
    if (!fs::is_regular_file(a.records)) throw IoError("cannot read " + a.records);
    const auto rows = chem::read_jsonl(a.records, [&](std::size_t line, const std::string &msg) {
      parse_errors.push_back("line " + std::to_string(line) + ": " + msg);
    });
    auto d = data::derive_pairs(rows, a.cutoff);
    d.report.parse_errors += parse_errors.size();
    d.report.records_read += parse_errors.size();
    d.report.errors.insert(d.report.errors.end(), parse_errors.begin(), parse_errors.end());
    data::write_instances(a.out, d.instances);
    write_json_file(report, d.report.to_json());
    m.set_result("report", d.report.to_json());
    out << "derived " << d.instances.size() << " dual instances from " << d.report.records_read << " records\n";
  });
  return kExitOk;
}

struct TrainArgs {
  std::string data, config, out, loss_csv, manifest;
  std::optional<std::uint64_t> seed;
  std::size_t log_every = 100;
};

int run_train(const TrainArgs &a, const std::vector<std::string> &argv, std::ostream &out, std::ostream &err) {
  train::TrainConfig tc;
  if (!a.config.empty()) {
    try {
      tc = train::TrainConfig::from_json(read_json_file(a.config));
    } catch (const json::exception &e) {
      throw train::TrainError(a.config + ": " + e.what());
    }
  }
  tc.seed = resolve_seed(a.seed, tc.seed);
  tc.validate();
  const std::string csv = a.loss_csv.empty() ? a.out + ".loss.csv" : a.loss_csv;
  RunManifest m(manifest_path(a.manifest, a.out), "train", argv);
  m.set_config(tc.to_json());
  m.set_seed(tc.seed);
  m.add_input(a.data);
  if (!a.config.empty()) m.add_input(a.config);
  m.add_artifact(a.out);
  m.add_artifact(csv);
  with_manifest(m, [&] {
    const auto data = data::read_instances(a.data);
    train::FitOptions fo;
    fo.checkpoint_path = a.out;
    fo.on_step = [&](const train::LossRecord &r) {
      if (a.log_every > 0 && (r.step % a.log_every == 0 || r.step == tc.steps))
        err << "step " << r.step << " loss " << r.total << " position " << r.position << '\n';
    };
    auto res = train::fit(data, tc, fo);
    train::write_loss_csv(csv, res.curve);
    if (!res.curve.empty()) m.set_result("final_loss", res.curve.back().total);
    out << "trained " << tc.steps << " steps on " << data.size() << " instances; checkpoint " << a.out << '\n';
  });
  return kExitOk;
}

struct SampleArgs {
  std::string ckpt, pockets, mode = "full", out, manifest;
  std::size_t count = 1, n_atoms = 0;
  std::optional<std::uint64_t> seed;
};

int run_sample(const SampleArgs &a, const std::vector<std::string> &argv, std::ostream &out) {
  const auto mode = sample::mode_from_string(a.mode);
  sample::SampleConfig sc;
  sc.count = a.count;
  sc.n_atoms = a.n_atoms;
  sc.mode = mode;
  sc.seed = resolve_seed(a.seed, 0);
  sc.validate();
  const fs::path dir = a.out;
  RunManifest m(manifest_path(a.manifest, dir / "samples"), "sample", argv);
  m.set_config(sc.to_json());
  m.set_seed(sc.seed);
  m.add_input(a.ckpt);
  m.add_input(a.pockets);
  m.add_artifact(dir / "samples.jsonl");
  m.add_artifact(dir / "samples.sdf");
  with_manifest(m, [&] {
    auto ck = train::load_checkpoint(a.ckpt);
    const auto rows = read_rows(a.pockets);
    if (rows.empty()) throw std::runtime_error(a.pockets + ": no pocket pairs");
    fs::create_directories(dir);
    std::ofstream sdf(dir / "samples.sdf");
    if (!sdf) throw IoError("cannot write " + (dir / "samples.sdf").string());
    std::vector<json> outrows;
    const num::Rng root(sc.seed);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      chem::Pocket p1, p2;
      try {
        p1 = chem::pocket_from_json(rows[r].at("pocket1"));
        p2 = chem::pocket_from_json(rows[r].at("pocket2"));
      } catch (const json::exception &e) {
        throw std::runtime_error(a.pockets + " row " + std::to_string(r + 1) + ": " + e.what());
      }
      auto cfg = sc;
      cfg.seed = root.split(r).next_u64();
      for (const auto &s : sample::generate(p1, p2, ck, cfg)) {
        auto j = sample::sample_to_json(s, p1.id, p2.id, mode);
        j["pair"] = r;
        outrows.push_back(std::move(j));
        chem::write_dual_sdf(sdf, "pair" + std::to_string(r) + "_sample" + std::to_string(s.index), s.graph,
                             s.pose1, s.pose2, p1.id, p2.id);
      }
    }
    chem::write_jsonl(dir / "samples.jsonl", outrows);
    if (!sdf.flush()) throw IoError("failed writing " + (dir / "samples.sdf").string());
    m.set_result("samples", outrows.size());
    out << "wrote " << outrows.size() << " samples to " << dir.string() << '\n';
  });
  return kExitOk;
}

std::vector<sample::GeneratedSample> read_samples(const fs::path &p) {
  std::vector<sample::GeneratedSample> v;
  const auto rows = read_rows(p);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    try {
      v.push_back(sample::sample_from_json(rows[i]));
    } catch (const std::exception &e) {
      throw std::runtime_error(p.string() + " row " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return v;
}

struct EvalArgs {
  std::string samples, report, manifest;
};

int run_eval(const EvalArgs &a, const std::vector<std::string> &argv, std::ostream &out) {
  RunManifest m(manifest_path(a.manifest, a.report), "eval", argv);
  m.add_input(a.samples);
  m.add_artifact(a.report);
  with_manifest(m, [&] {
    const auto r = eval::evaluate(read_samples(a.samples));
    const json j = r.to_json();
    write_json_file(a.report, j);
    m.set_result("dual_validity", r.dual_validity);
    m.set_result("diversity", j.at("diversity"));
    m.set_result("lipinski_mean", r.lipinski_mean);
    out << "samples " << r.n_samples << " dual_validity " << r.dual_validity << " diversity "
        << j.at("diversity").dump() << " lipinski_mean " << r.lipinski_mean << '\n';
  });
  return kExitOk;
}

struct SymmetryArgs {
  std::string ckpt, samples, report = "symmetry_report.json", manifest;
  std::size_t trials = 10;
  std::optional<std::uint64_t> seed;
};

int run_symmetry(const SymmetryArgs &a, const std::vector<std::string> &argv, std::ostream &out) {
  eval::SymmetryProbe probe;
  probe.trials = a.trials;
  probe.seed = resolve_seed(a.seed, 0);
  RunManifest m(manifest_path(a.manifest, a.report), "check-symmetry", argv);
  m.set_seed(probe.seed);
  m.set_config({{"trials", probe.trials}, {"tolerances", eval::SymmetryTolerances{}.to_json()}});
  m.add_input(a.ckpt);
  if (!a.samples.empty()) m.add_input(a.samples);
  m.add_artifact(a.report);
  with_manifest(m, [&] {
    auto ck = train::load_checkpoint(a.ckpt);
    auto rep = eval::verify_symmetries(ck.model, ck.schedule.steps(), probe);
    if (!a.samples.empty()) eval::add_r4(rep, read_samples(a.samples));
    const json j = rep.to_json();
    write_json_file(a.report, j);
    m.set_result("pass", j.at("pass"));
    out << "R1 " << (rep.r1_pass ? "pass" : "FAIL") << " (" << rep.r1_max_dev << ")  R2 "
        << (rep.r2_pass ? "pass" : "FAIL") << " (" << rep.r2_max_dev << ")  R3 " << (rep.r3_pass ? "pass" : "FAIL")
        << " (min effect " << rep.r3_min_effect << (rep.degenerate_coupling ? ", degenerate" : "") << ")";
    if (rep.r4_evaluated)
      out << "  R4 " << (rep.r4_pass ? "pass" : "FAIL") << " (" << rep.r4_fraction_above << " above "
          << rep.tol.r4_rmsd << " A)";
    out << '\n';
  });
  return kExitOk;
}

std::string error_kind(const std::exception &e) {
  if (dynamic_cast<const train::TrainError *>(&e)) return "train";
  if (dynamic_cast<const sample::SampleError *>(&e)) return "sample";
  if (dynamic_cast<const eval::EvalError *>(&e)) return "eval";
  if (dynamic_cast<const data::DatasetError *>(&e)) return "dataset";
  if (dynamic_cast<const chem::ChemError *>(&e)) return "chem";
  if (dynamic_cast<const json::exception *>(&e)) return "json";
  if (dynamic_cast<const fs::filesystem_error *>(&e) || dynamic_cast<const IoError *>(&e)) return "io";
  return "runtime";
}

// Suggestion for the first unrecognized long flag of a subcommand.
std::string flag_hint(CLI::App *sub, const std::vector<std::string> &args) {
  if (!sub) return {};
  std::vector<std::string> names;
  for (const auto *opt : sub->get_options())
    for (const auto &l : opt->get_lnames()) names.push_back("--" + l);
  for (const auto &a : args) {
    if (a.rfind("--", 0) != 0) continue;
    const std::string flag = a.substr(0, a.find('='));
    if (std::find(names.begin(), names.end(), flag) != names.end()) continue;
    if (auto s = suggest(flag, names)) return "unknown flag '" + flag + "'; did you mean '" + *s + "'?";
    return "unknown flag '" + flag + "'; see '" + sub->get_name() + " --help'";
  }
  return {};
}

}  // namespace

int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"dualfuse: dual-target ligand generation on a shared molecular graph", "dualfuse"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dualfuse 0.1.0");

  MockArgs mock;
  auto *c_mock = app.add_subcommand("mock-data", "Write synthetic complex records with planted cross-target repeats");
  c_mock->add_option("--ligands", mock.ligands, "Distinct ligands")->required();
  c_mock->add_option("--targets", mock.targets, "Targets each ligand is bound in")->required();
  c_mock->add_option("--seed", mock.seed, "RNG seed (overrides FUSE_SEED)");
  c_mock->add_option("--out", mock.out, "Output JSON-Lines of complex records")->capture_default_str();
  c_mock->add_option("--same-target-repeats", mock.cfg.same_target_repeats, "Extra occurrences under a used target");
  c_mock->add_option("--min-atoms", mock.cfg.min_atoms)->capture_default_str();
  c_mock->add_option("--max-atoms", mock.cfg.max_atoms)->capture_default_str();
  c_mock->add_option("--pocket-min", mock.cfg.pocket_min)->capture_default_str();
  c_mock->add_option("--pocket-max", mock.cfg.pocket_max)->capture_default_str();
  c_mock->add_option("--manifest", mock.manifest, "Manifest path (default: <out>.manifest.json)");

  DeriveArgs derive;
  auto *c_derive = app.add_subcommand("derive-dataset", "Derive dual-target instances from complex records");
  c_derive->add_option("--records", derive.records, "Input JSON-Lines of complex records")->required();
  c_derive->add_option("--out", derive.out, "Output JSON-Lines of dual instances")->required();
  c_derive->add_option("--report", derive.report, "Derivation report (default: <out>.report.json)");
  c_derive->add_option("--cutoff", derive.cutoff, "Pocket cutoff in Angstrom")->capture_default_str();
  c_derive->add_option("--manifest", derive.manifest);

  TrainArgs tr;
  auto *c_train = app.add_subcommand("train", "Fit the denoiser");
  c_train->add_option("--data", tr.data, "Dual instances (JSON-Lines)")->required();
  c_train->add_option("--config", tr.config, "Training config (JSON); defaults when omitted");
  c_train->add_option("--out", tr.out, "Checkpoint path")->required();
  c_train->add_option("--seed", tr.seed, "Overrides FUSE_SEED and the config seed");
  c_train->add_option("--loss-csv", tr.loss_csv, "Loss curve (default: <out>.loss.csv)");
  c_train->add_option("--log-every", tr.log_every, "Progress line interval, 0 for none")->capture_default_str();
  c_train->add_option("--manifest", tr.manifest);

  SampleArgs sa;
  auto *c_sample = app.add_subcommand("sample", "Generate dual-pose ligands for pocket pairs");
  c_sample->add_option("--ckpt", sa.ckpt, "Checkpoint")->required();
  c_sample->add_option("--pockets", sa.pockets, "JSON-Lines rows with pocket1 and pocket2")->required();
  c_sample->add_option("--count", sa.count, "Samples per pocket pair")->capture_default_str();
  c_sample->add_option("--mode", sa.mode, "full | no-bond | sequential")->capture_default_str();
  c_sample->add_option("--out", sa.out, "Output directory")->required();
  c_sample->add_option("--seed", sa.seed, "Overrides FUSE_SEED");
  c_sample->add_option("--n-atoms", sa.n_atoms, "Fixed ligand size; 0 draws from the training histogram")
      ->capture_default_str();
  c_sample->add_option("--manifest", sa.manifest);

  EvalArgs ev;
  auto *c_eval = app.add_subcommand("eval", "Metrics over generated samples");
  c_eval->add_option("--samples", ev.samples, "samples.jsonl from 'sample'")->required();
  c_eval->add_option("--report", ev.report, "Output JSON report")->required();
  c_eval->add_option("--manifest", ev.manifest);

  SymmetryArgs sy;
  auto *c_sym = app.add_subcommand("check-symmetry", "Verify R1-R3 on random inputs; R4 from samples");
  c_sym->add_option("--ckpt", sy.ckpt, "Checkpoint")->required();
  c_sym->add_option("--trials", sy.trials, "Random trials")->capture_default_str();
  c_sym->add_option("--seed", sy.seed, "Overrides FUSE_SEED");
  c_sym->add_option("--samples", sy.samples, "samples.jsonl for the R4 pose-pair RMSD");
  c_sym->add_option("--report", sy.report, "Output JSON report")->capture_default_str();
  c_sym->add_option("--manifest", sy.manifest);

  std::vector<std::string> argv{"dualfuse"};
  argv.insert(argv.end(), args.begin(), args.end());

  if (!args.empty() && !args[0].empty() && args[0][0] != '-' &&
      std::find(kCommands.begin(), kCommands.end(), args[0]) == kCommands.end()) {
    err << "dualfuse: unknown subcommand '" << args[0] << "'";
    if (auto s = suggest(args[0], kCommands)) err << "; did you mean '" << *s << "'?";
    err << "\nRun 'dualfuse --help' for the list of subcommands.\n";
    return kExitUsage;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) {
      // --help / --version
      if (dynamic_cast<const CLI::CallForVersion *>(&e))
        out << e.what() << '\n';
      else if (dynamic_cast<const CLI::CallForAllHelp *>(&e))
        out << app.help("", CLI::AppFormatMode::All);
      else {
        CLI::App *shown = &app;
        for (auto *s : app.get_subcommands()) shown = s;
        out << shown->help();
      }
      return kExitOk;
    }
    err << "dualfuse: " << e.what() << '\n';
    CLI::App *sub = nullptr;
    if (!args.empty())
      for (auto *s : app.get_subcommands({})) if (s->get_name() == args[0]) sub = s;
    if (auto hint = flag_hint(sub, args); !hint.empty()) err << hint << '\n';
    return kExitUsage;
  }

  try {
    if (c_mock->parsed()) return run_mock(mock, argv, out);
    if (c_derive->parsed()) return run_derive(derive, argv, out);
    if (c_train->parsed()) return run_train(tr, argv, out, err);
    if (c_sample->parsed()) return run_sample(sa, argv, out);
    if (c_eval->parsed()) return run_eval(ev, argv, out);
    if (c_sym->parsed()) return run_symmetry(sy, argv, out);
  } catch (const std::exception &e) {
    err << json{{"status", "error"}, {"kind", error_kind(e)}, {"message", e.what()}}.dump() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace dualfuse::cli
