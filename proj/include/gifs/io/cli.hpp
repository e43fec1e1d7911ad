#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/program_options.hpp>
#include <nlohmann/json.hpp>

#include "gifs/chaos.hpp"
#include "gifs/gifs_system.hpp"
#include "gifs/ifs.hpp"
#include "gifs/markov.hpp"
#include "gifs/metric.hpp"
#include "gifs/schedule.hpp"
#include "gifs/transport.hpp"
#include "gifs/io/csv.hpp"
#include "gifs/io/manifest.hpp"
#include "gifs/io/pgm.hpp"
#include "gifs/io/spec.hpp"

namespace gifs::io {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitPartial = 2;

inline constexpr const char* kUsage =
    "usage: gifs <command> [options]\n"
    "\n"
    "commands:\n"
    "  validate SPEC                 parse and check a system description\n"
    "  attractor-classical SPEC      m-term recursion with an a-posteriori certificate\n"
    "  attractor-evmap SPEC          evaluation-map iteration with an error ledger\n"
    "  measure SPEC                  joint attractor / invariant measure iteration\n"
    "  chaos SPEC                    random orbit and ergodic averages\n"
    "  distance --hausdorff|--mk A B distance between two CSV files\n"
    "  replay MANIFEST               re-run a recorded command and compare outputs\n"
    "\n"
    "run 'gifs <command> --help' for the options of a command.\n"
    "exit codes: 0 certified result, 2 partial result (budget or stall), 1 invalid input\n";

namespace cli_detail {

namespace po = boost::program_options;

/// Decimal for terminal output; always shows a fractional part or exponent.
inline std::string format_real(double v) {
  std::string s = format_double(v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

struct Common {
  std::filesystem::path out_dir = ".";
  std::size_t budget_points = kDefaultPointBudget;
  std::size_t budget_maps = kDefaultMapBudget;
  std::size_t budget_atoms = kDefaultAtomBudget;
  bool render = false;
  std::size_t width = 512;
  std::size_t height = 512;
  std::string project;
};

inline void add_common(po::options_description& desc, Common& c) {
  desc.add_options()
      ("help,h", "show this help")
      ("out-dir", po::value<std::string>()->default_value("."), "directory for outputs and manifest.json")
      ("budget-points", po::value<std::size_t>(&c.budget_points)->default_value(kDefaultPointBudget),
       "maximum raw point count per set operation")
      ("budget-maps", po::value<std::size_t>(&c.budget_maps)->default_value(kDefaultMapBudget),
       "maximum number of induced maps")
      ("budget-atoms", po::value<std::size_t>(&c.budget_atoms)->default_value(kDefaultAtomBudget),
       "maximum product-support size per Markov step")
      ("render", po::bool_switch(&c.render), "also write a PGM raster of the result")
      ("width", po::value<std::size_t>(&c.width)->default_value(512), "raster width")
      ("height", po::value<std::size_t>(&c.height)->default_value(512), "raster height")
      ("project", po::value<std::string>(&c.project), "coordinate pair i,j to render when dim > 2");
}

struct Parsed {
  po::variables_map vm;
  std::vector<std::string> positional;
};

inline Parsed parse(const std::vector<std::string>& args, po::options_description& desc, Common* common,
                    std::size_t max_positional) {
  desc.add_options()("input", po::value<std::vector<std::string>>(), "positional arguments");
  po::positional_options_description pos;
  pos.add("input", -1);
  Parsed p;
  po::store(po::command_line_parser(args).options(desc).positional(pos).run(), p.vm);
  po::notify(p.vm);
  if (p.vm.count("input")) p.positional = p.vm["input"].as<std::vector<std::string>>();
  if (p.positional.size() > max_positional) throw std::invalid_argument("too many positional arguments");
  if (common) common->out_dir = p.vm["out-dir"].as<std::string>();
  return p;
}

inline std::string help_text(const std::string& command, const std::string& synopsis,
                             const po::options_description& desc) {
  std::ostringstream os;
  os << "usage: gifs " << command << " " << synopsis << "\n\n";
  for (const auto& opt : desc.options()) {
    if (opt->long_name() == "input") continue;
    os << "  " << opt->format_name() << " " << opt->format_parameter() << "\n      " << opt->description() << "\n";
  }
  return os.str();
}

struct LoadedSpec {
  std::string path;
  std::string sha256;
  SystemSpec spec;
};

inline LoadedSpec load_spec(const std::vector<std::string>& positional) {
  if (positional.empty()) throw std::invalid_argument("missing SPEC argument");
  const std::string text = read_file(positional[0]);
  return {positional[0], sha256_hex(text), parse_spec(text)};
}

/// Fixed point of x -> phi_1(x, ..., x).
inline Point diagonal_fixed_point(const GifsSystem& s) {
  const auto& phi = s.maps().front();
  const std::size_t d = s.dim();
  Matrix a = Matrix::identity(d);
  for (const auto& m : phi.matrices())
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) a(r, c) -= m(r, c);
  return solve_linear(std::move(a), phi.offset());
}

inline Point parse_point(const std::string& text, std::size_t dim) {
  std::vector<double> v;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    v.push_back(parse_double(rest.substr(0, comma), "point"));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (v.size() != dim) throw DimensionMismatch(dim, v.size());
  return v;
}

inline void maybe_render(RunManifest& m, const Common& c, const PointSet& set, const std::string& name) {
  if (!c.render) return;
  PointSet drawable = set;
  if (set.dim() > 2) {
    if (c.project.empty())
      throw std::invalid_argument("dimension " + std::to_string(set.dim()) +
                                  " cannot be rendered directly; pass --project i,j");
    const auto comma = c.project.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("--project expects i,j");
    drawable = project_pair(set, static_cast<std::size_t>(std::stoul(c.project.substr(0, comma))),
                            static_cast<std::size_t>(std::stoul(c.project.substr(comma + 1))));
  }
  emit_output(m, c.out_dir, name, render_pointset(drawable, c.width, c.height).to_pgm());
}

inline void finish(RunManifest& m, const Common& c, int code, std::chrono::steady_clock::time_point start) {
  m.exit_code = code;
  if (m.status.empty()) m.status = code == kExitOk ? "certified" : "partial";
  m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file_atomic(c.out_dir / "manifest.json", m.to_json().dump(2) + "\n");
}

inline RunManifest start_manifest(const std::string& command, const std::vector<std::string>& args,
                                  const LoadedSpec& spec) {
  RunManifest m;
  m.command = command;
  m.argv = args;
  m.spec_path = spec.path;
  m.spec_sha256 = spec.sha256;
  return m;
}

inline int cmd_validate(const std::vector<std::string>& args, std::ostream& out) {
  po::options_description desc("validate options");
  desc.add_options()("help,h", "show this help");
  const auto p = parse(args, desc, nullptr, 1);
  if (p.vm.count("help")) {
    out << help_text("validate", "SPEC", desc);
    return kExitOk;
  }
  const auto loaded = load_spec(p.positional);
  const GifsSystem s = to_system(loaded.spec);
  out << "valid: n=" << s.size() << " m=" << s.order() << " d=" << s.dim()
      << " lip_fs=" << format_real(s.lip_fs()) << "\n";
  for (std::size_t j = 0; j < s.size(); ++j) {
    out << "map " << j << " a=(";
    const auto& a = s.maps()[j].arg_lips();
    for (std::size_t i = 0; i < a.size(); ++i) out << (i ? ", " : "") << format_real(a[i]);
    out << ")\n";
  }
  if (loaded.spec.probs) to_gifsp(loaded.spec);
  return kExitOk;
}

inline int cmd_classical(const std::vector<std::string>& args, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  Common c;
  double tol = 1e-3;
  std::size_t cap = 200;
  po::options_description desc("attractor-classical options");
  add_common(desc, c);
  desc.add_options()("tol", po::value<double>(&tol)->default_value(1e-3), "target Hausdorff distance")
      ("max-steps", po::value<std::size_t>(&cap)->default_value(200), "recursion steps before giving up");
  const auto p = parse(args, desc, &c, 1);
  if (p.vm.count("help")) {
    out << help_text("attractor-classical", "SPEC [options]", desc);
    return kExitOk;
  }
  if (!(tol > 0.0)) throw std::invalid_argument("--tol must be positive");
  const auto loaded = load_spec(p.positional);
  const GifsSystem s = to_system(loaded.spec);
  RunManifest m = start_manifest("attractor-classical", args, loaded);

  const double lip = s.lip_fs();
  const std::size_t d = s.dim();
  // Certificate: h(C, A) <= (h(C, snap F(C)) + snap error) / (1 - lip).
  // The certifying lattice spends half of tol; the recursion runs finer.
  const double delta_cert = tol * (1.0 - lip) / std::sqrt(static_cast<double>(d));
  const double delta_rec = delta_cert / 4.0;
  std::vector<PointSet> window(s.order(), PointSet(d, diagonal_fixed_point(s)));
  std::optional<PointSet> best;
  double best_bound = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  int code = kExitOk;
  std::string note;
  std::size_t steps = 0;
  try {
    for (std::size_t k = 1; k <= cap; ++k) {
      std::vector<const PointSet*> argp;
      for (const auto& a : window) argp.push_back(&a);
      PointSet next = gifs_operator(s, argp, delta_rec, c.budget_points);
      window.erase(window.begin());
      window.push_back(std::move(next));
      steps = k;
      const double bound = a_posteriori_bound(s, window.back(), delta_cert, c.budget_points);
      if (bound < best_bound) {
        best_bound = bound;
        best = window.back();
        since_best = 0;
      } else if (++since_best > 3 * s.order() + 5) {
        note = "certificate stalled above tolerance";
        break;
      }
      if (bound <= tol) break;
    }
  } catch (const BudgetExceeded& e) {
    note = e.what();
  }
  if (!best) throw std::runtime_error("attractor-classical: " + (note.empty() ? std::string("no iterate") : note));
  if (best_bound > tol) {
    code = kExitPartial;
    if (note.empty()) note = "step cap reached";
  }
  emit_output(m, c.out_dir, "attractor.csv", pointset_to_csv(*best));
  maybe_render(m, c, *best, "attractor.pgm");
  m.parameters["tol"] = tol;
  m.parameters["delta_recursion"] = delta_rec;
  m.parameters["delta_certificate"] = delta_cert;
  m.parameters["steps"] = steps;
  m.parameters["budget_points"] = c.budget_points;
  m.bounds["hausdorff_to_attractor"] = best_bound;
  m.bounds["lip_fs"] = lip;
  if (!note.empty()) m.notes.push_back(note);
  out << "points " << best->size() << "\nbound " << format_real(best_bound) << "\n";
  finish(m, c, code, start);
  return code;
}

inline Schedules read_schedules(const po::variables_map& vm) {
  return {Schedule::parse(vm["beta-schedule"].as<std::string>()),
          Schedule::parse(vm["sigma-schedule"].as<std::string>())};
}

inline void add_schedule_options(po::options_description& desc, std::size_t default_k) {
  desc.add_options()
      ("K", po::value<std::size_t>()->default_value(default_k), "outer iterations")
      ("beta-schedule", po::value<std::string>()->default_value("1/k"),
       "subsampling density: 1/k, c/k, geometric:r[:c] or const:c")
      ("sigma-schedule", po::value<std::string>()->default_value("1/k"), "inner tolerance schedule")
      ("tol", po::value<double>(), "stop early once the certified bound is at most this");
}

inline void record_ledger(RunManifest& m, const OstrowskiLedger& ledger, const Schedules& sched, std::size_t k) {
  m.parameters["K"] = k;
  m.parameters["beta_schedule"] = sched.beta.str();
  m.parameters["sigma_schedule"] = sched.sigma.str();
  m.bounds["alpha"] = ledger.alpha();
  m.bounds["d01"] = ledger.d01();
  m.bounds["steps"] = ledger.steps();
  m.bounds["final"] = ledger.final_bound();
}

inline int cmd_evmap(const std::vector<std::string>& args, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  Common c;
  po::options_description desc("attractor-evmap options");
  add_common(desc, c);
  add_schedule_options(desc, 12);
  const auto p = parse(args, desc, &c, 1);
  if (p.vm.count("help")) {
    out << help_text("attractor-evmap", "SPEC [options]", desc);
    return kExitOk;
  }
  const auto loaded = load_spec(p.positional);
  const GifsSystem s = to_system(loaded.spec);
  const Schedules sched = read_schedules(p.vm);
  const std::size_t k = p.vm["K"].as<std::size_t>();
  RunManifest m = start_manifest("attractor-evmap", args, loaded);

  ApproximationOptions opts;
  opts.map_budget = c.budget_maps;
  opts.inner.point_budget = c.budget_points;
  if (p.vm.count("tol")) opts.stop_below = p.vm["tol"].as<double>();
  const PointSet b0(s.dim(), diagonal_fixed_point(s));
  const auto res = approximate_attractor(s, b0, sched, k, opts);
  if (res.ledger.steps() == 0) throw std::runtime_error("attractor-evmap: no step completed: " + res.note);

  emit_output(m, c.out_dir, "attractor.csv", pointset_to_csv(res.set));
  emit_output(m, c.out_dir, "ledger.csv", ledger_to_csv(res.ledger));
  maybe_render(m, c, res.set, "attractor.pgm");
  record_ledger(m, res.ledger, sched, k);
  m.parameters["budget_maps"] = c.budget_maps;
  m.parameters["budget_points"] = c.budget_points;
  m.bounds["hausdorff_to_attractor"] = res.ledger.final_bound();
  for (std::size_t i = 0; i < res.ledger.steps(); ++i)
    if (!res.ledger.notes()[i].empty()) m.notes.push_back("step " + std::to_string(i + 1) + ": " + res.ledger.notes()[i]);
  if (!res.note.empty()) m.notes.push_back(res.note);
  const int code = res.budget_exceeded ? kExitPartial : kExitOk;
  out << "points " << res.set.size() << "\nsteps " << res.ledger.steps() << "\nbound "
      << format_real(res.ledger.final_bound()) << "\n";
  finish(m, c, code, start);
  return code;
}

inline int cmd_measure(const std::vector<std::string>& args, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  Common c;
  po::options_description desc("measure options");
  add_common(desc, c);
  add_schedule_options(desc, 10);
  desc.add_options()("w-min", po::value<double>()->default_value(kDefaultWeightFloor), "weight floor for atoms");
  const auto p = parse(args, desc, &c, 1);
  if (p.vm.count("help")) {
    out << help_text("measure", "SPEC [options]", desc);
    return kExitOk;
  }
  const auto loaded = load_spec(p.positional);
  const GifsP gp = to_gifsp(loaded.spec);
  const Schedules sched = read_schedules(p.vm);
  const std::size_t k = p.vm["K"].as<std::size_t>();
  RunManifest m = start_manifest("measure", args, loaded);
  if (!loaded.spec.probs) m.notes.push_back("no probabilities in the system file; using equal weights");

  JointIterateOptions opts;
  opts.joint.map_budget = c.budget_maps;
  opts.joint.set_inner.point_budget = c.budget_points;
  opts.joint.measure_inner.atom_budget = c.budget_atoms;
  opts.joint.measure_inner.map_budget = c.budget_maps;
  opts.joint.measure_inner.w_min = p.vm["w-min"].as<double>();
  if (p.vm.count("tol")) opts.stop_below = p.vm["tol"].as<double>();
  const Point x0 = diagonal_fixed_point(gp.system());
  const auto res = joint_iterate(gp, PointSet(gp.system().dim(), x0), DiscreteMeasure::dirac(x0), sched, k, opts);
  if (res.ledger.steps() == 0) throw std::runtime_error("measure: no step completed: " + res.note);

  emit_output(m, c.out_dir, "attractor.csv", pointset_to_csv(res.set));
  emit_output(m, c.out_dir, "measure.csv", measure_to_csv(res.measure));
  emit_output(m, c.out_dir, "ledger.csv", ledger_to_csv(res.ledger));
  maybe_render(m, c, res.set, "attractor.pgm");
  record_ledger(m, res.ledger, sched, k);
  m.parameters["probs"] = gp.probs();
  m.parameters["w_min"] = p.vm["w-min"].as<double>();
  m.parameters["budget_atoms"] = c.budget_atoms;
  m.bounds["d_max_to_fixed_point"] = res.ledger.final_bound();
  if (!res.note.empty()) m.notes.push_back(res.note);
  const int code = res.budget_exceeded ? kExitPartial : kExitOk;
  out << "points " << res.set.size() << "\natoms " << res.measure.size() << "\nsteps " << res.ledger.steps()
      << "\nbound " << format_real(res.ledger.final_bound()) << "\n";
  finish(m, c, code, start);
  return code;
}

inline int cmd_chaos(const std::vector<std::string>& args, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  Common c;
  std::uint64_t seed = 0;
  std::size_t length = 100000, burn_in = 100;
  double bin_width = 1e-3;
  po::options_description desc("chaos options");
  add_common(desc, c);
  desc.add_options()
      ("seed", po::value<std::uint64_t>(&seed)->default_value(0), "random seed")
      ("length", po::value<std::size_t>(&length)->default_value(100000), "total orbit steps")
      ("burn-in", po::value<std::size_t>(&burn_in)->default_value(100), "steps discarded first")
      ("observable", po::value<std::vector<std::string>>(), "observable to average (repeatable)")
      ("bin-width", po::value<double>(&bin_width)->default_value(1e-3), "lattice for the empirical measure")
      ("nu", po::value<std::string>(), "measure CSV for the trailing arguments (default: point mass)")
      ("seed-point", po::value<std::string>(), "starting point x0 as comma-separated coordinates")
      ("diagnostics", po::bool_switch(), "compare with the deterministic attractor of the induced system");
  const auto p = parse(args, desc, &c, 1);
  if (p.vm.count("help")) {
    out << help_text("chaos", "SPEC [options]", desc);
    return kExitOk;
  }
  const auto loaded = load_spec(p.positional);
  const GifsP gp = to_gifsp(loaded.spec);
  const std::size_t d = gp.system().dim();
  RunManifest m = start_manifest("chaos", args, loaded);
  const Point x0 = p.vm.count("seed-point") ? parse_point(p.vm["seed-point"].as<std::string>(), d)
                                            : diagonal_fixed_point(gp.system());
  const DiscreteMeasure nu =
      p.vm.count("nu") ? measure_from_csv(read_file(p.vm["nu"].as<std::string>())) : DiscreteMeasure::dirac(x0);
  require_same_dim(d, nu.dim());
  std::vector<std::string> observables;
  if (p.vm.count("observable"))
    observables = p.vm["observable"].as<std::vector<std::string>>();
  else
    observables.push_back(d == 1 ? "identity" : "coord:0");
  std::vector<Observable> fs;
  for (const auto& name : observables) fs.push_back(make_observable(name, d));

  const Orbit orbit = random_orbit(gp, nu, {x0, seed, burn_in, length});
  std::string orbit_csv;
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    const auto q = orbit[i];
    for (std::size_t k = 0; k < d; ++k) orbit_csv += (k ? "," : "") + format_double(q[k]);
    orbit_csv += '\n';
  }
  emit_output(m, c.out_dir, "orbit.csv", orbit_csv);
  emit_output(m, c.out_dir, "empirical.csv", measure_to_csv(empirical_measure(orbit, bin_width)));
  std::string averages = "observable,value\n";
  for (const auto& f : fs) {
    const double v = ergodic_average(orbit, f);
    averages += f.name + ',' + format_double(v) + '\n';
    out << "average " << f.name << " " << format_real(v) << "\n";
    m.bounds["average " + f.name] = v;
  }
  emit_output(m, c.out_dir, "averages.csv", averages);
  maybe_render(m, c, orbit.to_set(), "orbit.pgm");
  m.parameters["seed"] = seed;
  m.parameters["length"] = length;
  m.parameters["burn_in"] = burn_in;
  m.parameters["bin_width"] = bin_width;
  m.parameters["seed_point"] = x0;
  m.parameters["probs"] = gp.probs();
  if (p.vm["diagnostics"].as<bool>()) {
    const FiniteIfs ifs = induce_ifs(gp.system(), nu.atoms(), c.budget_maps);
    AttractorOptions ao;
    ao.point_budget = c.budget_points;
    const auto att = attractor(ifs, bin_width, ao);
    const double h = hausdorff(orbit.to_set(), att.set);
    out << "hausdorff_to_induced_attractor " << format_real(h) << " (attractor certified to "
        << format_real(att.report.bound()) << ")\n";
    m.bounds["hausdorff_to_induced_attractor"] = h;
    m.bounds["induced_attractor_bound"] = att.report.bound();
  }
  m.status = "experimental";
  m.notes.push_back("orbit statistics carry no certified bound");
  finish(m, c, kExitOk, start);
  return kExitOk;
}

inline int cmd_distance(const std::vector<std::string>& args, std::ostream& out) {
  po::options_description desc("distance options");
  desc.add_options()("help,h", "show this help")
      ("hausdorff", po::bool_switch(), "Hausdorff distance between two point-set CSVs")
      ("mk", po::bool_switch(), "Monge-Kantorovich distance between two measure CSVs");
  const auto p = parse(args, desc, nullptr, 2);
  if (p.vm.count("help")) {
    out << help_text("distance", "--hausdorff|--mk A.csv B.csv", desc);
    return kExitOk;
  }
  const bool h = p.vm["hausdorff"].as<bool>(), mk = p.vm["mk"].as<bool>();
  if (h == mk) throw std::invalid_argument("distance: pass exactly one of --hausdorff or --mk");
  if (p.positional.size() != 2) throw std::invalid_argument("distance: expected two files");
  const std::string a = read_file(p.positional[0]), b = read_file(p.positional[1]);
  const double v = h ? hausdorff(pointset_from_csv(a), pointset_from_csv(b))
                     : mk_distance(measure_from_csv(a), measure_from_csv(b));
  out << format_real(v) << "\n";
  return kExitOk;
}

}  // namespace cli_detail

inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

namespace cli_detail {

/// Re-runs the argv recorded in a manifest into a new output directory and
/// compares every CSV output byte for byte (through its hash).
inline int cmd_replay(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  po::options_description desc("replay options");
  desc.add_options()("help,h", "show this help")
      ("out-dir", po::value<std::string>(), "where the re-run writes (default: <manifest dir>/replay)");
  const auto p = parse(args, desc, nullptr, 1);
  if (p.vm.count("help")) {
    out << help_text("replay", "MANIFEST [--out-dir DIR]", desc);
    return kExitOk;
  }
  if (p.positional.empty()) throw std::invalid_argument("replay: missing MANIFEST");
  const std::filesystem::path manifest_path = p.positional[0];
  const RunManifest recorded = RunManifest::from_json(nlohmann::json::parse(read_file(manifest_path)));
  const std::filesystem::path target =
      p.vm.count("out-dir") ? std::filesystem::path(p.vm["out-dir"].as<std::string>())
                            : manifest_path.parent_path() / "replay";
  if (!recorded.spec_path.empty() && sha256_hex(read_file(recorded.spec_path)) != recorded.spec_sha256) {
    err << "replay: " << recorded.spec_path << " changed since the recorded run\n";
    return kExitInvalid;
  }
  std::vector<std::string> argv{recorded.command};
  for (std::size_t i = 0; i < recorded.argv.size(); ++i) {
    const std::string& a = recorded.argv[i];
    if (a == "--out-dir") {
      ++i;
      continue;
    }
    if (a.rfind("--out-dir=", 0) == 0) continue;
    argv.push_back(a);
  }
  argv.push_back("--out-dir");
  argv.push_back(target.string());
  std::ostringstream sink;
  const int code = run_command(argv, sink, err);
  bool same = code == recorded.exit_code;
  if (!same) out << "exit code " << code << " differs from recorded " << recorded.exit_code << "\n";
  for (const auto& o : recorded.outputs) {
    if (std::filesystem::path(o.path).extension() != ".csv") continue;
    const auto file = target / o.path;
    const bool match = std::filesystem::exists(file) && sha256_hex(read_file(file)) == o.sha256;
    out << (match ? "identical " : "differs ") << o.path << "\n";
    same = same && match;
  }
  return same ? kExitOk : kExitInvalid;
}

}  // namespace cli_detail

/// Dispatches one CLI invocation; args excludes the program name.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    (args.empty() ? err : out) << kUsage;
    return args.empty() ? kExitInvalid : kExitOk;
  }
  const std::string cmd = args[0];
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  try {
    if (cmd == "validate") return cmd_validate(rest, out);
    if (cmd == "attractor-classical") return cmd_classical(rest, out);
    if (cmd == "attractor-evmap") return cmd_evmap(rest, out);
    if (cmd == "measure") return cmd_measure(rest, out);
    if (cmd == "chaos") return cmd_chaos(rest, out);
    if (cmd == "distance") return cmd_distance(rest, out);
    if (cmd == "replay") return cmd_replay(rest, out, err);
    err << "unknown command '" << cmd << "'\n" << kUsage;
    return kExitInvalid;
  } catch (const SpecError& e) {
    err << e.what() << "\n";
    return kExitInvalid;
  } catch (const boost::program_options::error& e) {
    err << cmd << ": " << e.what() << "\n";
    return kExitInvalid;
  } catch (const BudgetExceeded& e) {
    err << cmd << ": " << e.what() << "\n";
    return kExitPartial;
  } catch (const std::exception& e) {
    err << cmd << ": " << e.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace gifs::io
