// Command-line front end: partition a knowledge base, sweep abduction-space
// sizes, run curriculum / baseline training, check sub-base entailment
// agreement, and compare finished runs.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "cabl/abduction.hpp"
#include "cabl/entail_check.hpp"
#include "cabl/parser.hpp"
#include "cabl/partition.hpp"
#include "cabl/tasks.hpp"
#include "cabl/trainer.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;  // malformed inputs (parse errors and the like)

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TrainFlags {
  std::string task = "addition";
  bool per_phase_explicit = false;
  int base = 10;
  int digits = 1;
  std::string method = "cabl";
  int tau = 2;
  bool no_tau = false;
  int iters = 2000;
  std::uint64_t seed = 0;
  std::string out;
  // advanced knobs (config-file friendly)
  int gate_check_every = 50;
  int max_iterations_per_phase = 1000;
  double learning_rate = 0.1;
  double init_scale = 0.5;
  int train_size = 8000;
  int val_size = 200;
  int feature_dim = 16;
  double class_separation = 5.0;
  double noise_sigma = 1.0;
  std::string abduction = "oracle";
  bool validate_numerics = false;
  int board = 8;
};

cabl::tasks::Task make_task(const TrainFlags& f) {
  if (f.task == "addition")
    return cabl::tasks::Task::addition({f.base, f.digits});
  // For chess, --digits counts the pieces on the board.
  return cabl::tasks::Task::chess({f.board, f.digits});
}

int cmd_partition(const std::string& kb_path, int tau, bool have_tau,
                  const std::string& dot_path) {
  std::string text = read_file(kb_path);
  cabl::logic::KnowledgeBase kb = cabl::logic::parse_program(text);
  std::optional<int> tau_opt;
  if (have_tau) tau_opt = tau;
  cabl::curriculum::Curriculum cur = cabl::curriculum::partition(kb, tau_opt);
  std::cout << cabl::curriculum::curriculum_summary(kb, cur);
  std::cout << "partition time: " << std::fixed << std::setprecision(3)
            << cur.partition_wall_ms << " ms\n";
  if (!dot_path.empty()) {
    cabl::curriculum::DependencyGraph g = cabl::curriculum::build_dependency_graph(kb);
    std::ofstream dot(dot_path);
    if (!dot) throw std::runtime_error("cannot open " + dot_path);
    dot << cabl::curriculum::to_dot(kb, g, cur);
  }
  return 0;
}

int cmd_abspace(int base, const std::string& digit_range, int tau, bool have_tau,
                const std::string& out_path) {
  int lo = 0, hi = 0;
  auto dots = digit_range.find("..");
  if (dots == std::string::npos) {
    lo = hi = std::stoi(digit_range);
  } else {
    lo = std::stoi(digit_range.substr(0, dots));
    hi = std::stoi(digit_range.substr(dots + 2));
  }
  if (lo < 1 || hi < lo) throw std::runtime_error("bad --digits range " + digit_range);

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open " + out_path);
  out << "task,base,d,m,tau,phase,domain_size,space_size,bound_Nm,conditioned_size,wall_ms\n";

  std::optional<int> tau_opt;
  if (have_tau) tau_opt = tau;

  for (int d = lo; d <= hi; ++d) {
    cabl::tasks::Task task = cabl::tasks::Task::addition({base, d});
    const int m = task.seq_len();
    const int n = task.num_labels();
    // Exemplar target: operand digits alternate 1,3 and 7,3 (13 + 73 = 86
    // for d = 2); true labels are the digit values themselves.
    std::vector<int> z_star;
    std::int64_t a = 0, b = 0;
    for (int i = 0; i < d; ++i) {
      a = a * base + (i % 2 == 0 ? 1 : 3);
      b = b * base + (i % 2 == 0 ? 7 : 3);
    }
    for (std::int64_t v : {a, b}) {
      std::vector<int> ds(static_cast<std::size_t>(d));
      std::int64_t rest = v;
      for (int i = d - 1; i >= 0; --i) {
        ds[static_cast<std::size_t>(i)] = static_cast<int>(rest % base);
        rest /= base;
      }
      z_star.insert(z_star.end(), ds.begin(), ds.end());
    }
    cabl::logic::TargetValue y{a + b};
    double bound = std::pow(static_cast<double>(n), m);
    auto oracle = task.oracle({});
    std::string tau_str = have_tau ? std::to_string(tau) : "none";

    std::vector<int> full_domain(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) full_domain[static_cast<std::size_t>(i)] = i;

    auto emit = [&](int phase, std::size_t domain_size, std::size_t space,
                    std::size_t conditioned, double ms) {
      out << "addition," << base << ',' << d << ',' << m << ',' << tau_str << ',' << phase
          << ',' << domain_size << ',' << space << ',' << std::setprecision(0) << std::fixed
          << bound << std::defaultfloat << ',' << conditioned << ',' << std::fixed
          << std::setprecision(3) << ms << std::defaultfloat << '\n';
    };

    auto t0 = std::chrono::steady_clock::now();
    cabl::abduction::AbductionSpace full_space =
        cabl::abduction::abduction_space_oracle(*oracle, y, m, full_domain);
    double full_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    emit(0, full_domain.size(), full_space.size(), full_space.size(), full_ms);

    cabl::curriculum::Curriculum cur = cabl::curriculum::partition(task.kb(), tau_opt);
    std::vector<int> prev_domain;
    for (int p = 0; p < cur.phase_count(); ++p) {
      const auto& phase = cur.phases[static_cast<std::size_t>(p)];
      auto t1 = std::chrono::steady_clock::now();
      cabl::abduction::AbductionSpace sp =
          cabl::abduction::abduction_space_oracle(*oracle, y, m, phase.domain);
      // Positions whose true concept was introduced in an earlier phase are
      // clamped to it: earlier-phase concepts are assumed learned.
      std::map<int, int> fixed;
      for (int i = 0; i < m; ++i) {
        int truth = z_star[static_cast<std::size_t>(i)];
        if (std::binary_search(prev_domain.begin(), prev_domain.end(), truth))
          fixed[i] = truth;
      }
      cabl::abduction::AbductionSpace cond = cabl::abduction::conditioned_space(sp, fixed);
      double ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t1)
                      .count();
      emit(p + 1, phase.domain.size(), sp.size(), cond.size(), ms);
      prev_domain = phase.domain;
    }
  }
  return 0;
}

int cmd_entail_check(const std::string& kb_path, int tau, int samples, std::uint64_t seed) {
  std::string text = read_file(kb_path);
  cabl::logic::KnowledgeBase kb = cabl::logic::parse_program(text);
  cabl::curriculum::Curriculum cur = cabl::curriculum::partition(kb, tau);
  cabl::check::EntailCheckOptions opts;
  opts.samples_per_pair = samples;
  opts.seed = seed;
  cabl::check::EntailCheckReport report = cabl::check::check_curriculum(kb, cur, opts);
  std::cout << report.to_string();
  return report.all_agree() ? 0 : 1;
}

int cmd_train(const TrainFlags& f) {
  cabl::tasks::Task task = make_task(f);
  cabl::training::TrainConfig config;
  config.method = f.method == "abl" ? cabl::training::Method::Abl
                                    : cabl::training::Method::CAbl;
  if (f.no_tau)
    config.tau.reset();
  else
    config.tau = f.tau;
  config.max_iterations = f.iters;
  config.gate_check_every = f.gate_check_every;
  // The per-phase bound caps at the run length unless set explicitly.
  config.max_iterations_per_phase =
      f.per_phase_explicit ? f.max_iterations_per_phase
                           : std::min(f.max_iterations_per_phase, f.iters);
  config.learning_rate = f.learning_rate;
  config.init_scale = f.init_scale;
  config.seed = f.seed;
  config.dataset.train_size = f.train_size;
  config.dataset.val_size = f.val_size;
  config.dataset.feature_dim = f.feature_dim;
  config.dataset.class_separation = f.class_separation;
  config.dataset.noise_sigma = f.noise_sigma;
  config.use_oracle_spaces = f.abduction != "generic";
  config.validate_numerics = f.validate_numerics;

  cabl::training::RunReport report = cabl::training::run_training(task, config);
  cabl::training::write_run_report(f.out, report);

  std::cout << "run written to " << f.out << '\n';
  std::cout << "phases: " << report.phase_new_concepts.size()
            << ", transitions: " << report.phase_transitions.size()
            << (report.any_forced() ? " (some forced)" : "") << '\n';
  std::cout << std::fixed << std::setprecision(4)
            << "final mean concept accuracy: " << report.final_record().mean_acc << '\n'
            << "final sequence accuracy: " << report.final_record().seq_acc << '\n';
  return 0;
}

int cmd_compare(const std::vector<std::string>& dirs) {
  if (dirs.size() < 2) throw std::runtime_error("compare needs at least 2 run directories");
  cabl::training::RunReport first = cabl::training::read_run_report(dirs[0]);
  for (std::size_t i = 1; i < dirs.size(); ++i) {
    cabl::training::RunReport other = cabl::training::read_run_report(dirs[i]);
    cabl::training::ComparisonSummary cmp = cabl::training::compare_runs(first, other);
    std::cout << "== " << dirs[0] << " vs " << dirs[i] << " ==\n" << cmp.to_string();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curriculum abductive learning over Horn-clause knowledge bases"};
  app.require_subcommand(1);

  // partition
  auto* partition = app.add_subcommand("partition", "Partition a knowledge base");
  std::string kb_path, dot_path;
  int tau = 0;
  partition->add_option("--kb", kb_path, "knowledge base file")->required();
  auto* ptau = partition->add_option("--tau", tau, "minimum concepts per phase");
  partition->add_option("--dot", dot_path, "write the dependency graph as DOT");

  // train
  auto* train = app.add_subcommand("train", "Run curriculum or baseline training");
  TrainFlags tf;
  train->add_option("--task", tf.task, "addition or chess")
      ->check(CLI::IsMember({"addition", "chess"}));
  train->add_option("--base", tf.base, "digit base (10 or 16)")
      ->check(CLI::IsMember({10, 16}));
  train->add_option("--digits", tf.digits, "digits per operand (pieces for chess)");
  train->add_option("--method", tf.method, "cabl or abl")
      ->check(CLI::IsMember({"cabl", "abl"}));
  auto* ttau = train->add_option("--tau", tf.tau, "minimum concepts per phase");
  train->add_option("--iters", tf.iters, "total training iterations");
  train->add_option("--seed", tf.seed, "master seed");
  train->add_option("--out", tf.out, "output directory")->required();
  train->set_config("--config", "", "flat key=value config file");
  train->add_option("--gate-check-every", tf.gate_check_every, "validation cadence");
  auto* per_phase = train->add_option("--max-iterations-per-phase",
                                      tf.max_iterations_per_phase,
                                      "forced-transition bound");
  train->add_option("--learning-rate", tf.learning_rate, "gradient step size");
  train->add_option("--init-scale", tf.init_scale, "random model init scale");
  train->add_option("--train-size", tf.train_size, "training sequences");
  train->add_option("--val-size", tf.val_size, "validation sequences");
  train->add_option("--feature-dim", tf.feature_dim, "synthetic feature dimension");
  train->add_option("--class-separation", tf.class_separation, "distance between class means");
  train->add_option("--noise-sigma", tf.noise_sigma, "feature noise sigma");
  train->add_option("--abduction", tf.abduction, "oracle or generic")
      ->check(CLI::IsMember({"oracle", "generic"}));
  train->add_flag("--validate-numerics", tf.validate_numerics,
                  "count normalization violations");
  train->add_option("--board", tf.board, "chess board size");

  // abspace
  auto* abspace = app.add_subcommand("abspace", "Sweep abduction-space sizes");
  std::string ab_task = "addition", ab_digits = "1..2", ab_out;
  int ab_base = 10, ab_tau = 2;
  abspace->add_option("--task", ab_task, "task (addition)")
      ->check(CLI::IsMember({"addition"}));
  abspace->add_option("--base", ab_base, "digit base")->check(CLI::IsMember({10, 16}));
  abspace->add_option("--digits", ab_digits, "digit range LO..HI");
  auto* atau = abspace->add_option("--tau", ab_tau, "minimum concepts per phase");
  abspace->add_option("--out", ab_out, "output CSV")->required();

  // entail-check
  auto* entail = app.add_subcommand("entail-check", "Check sub-base entailment agreement");
  std::string ec_kb;
  int ec_tau = 2, ec_samples = 200;
  std::uint64_t ec_seed = 0;
  entail->add_option("--kb", ec_kb, "knowledge base file")->required();
  entail->add_option("--tau", ec_tau, "minimum concepts per phase")->required();
  entail->add_option("--samples", ec_samples, "queries per phase pair");
  entail->add_option("--seed", ec_seed, "sampling seed");

  // compare
  auto* compare = app.add_subcommand("compare", "Compare finished runs");
  std::vector<std::string> run_dirs;
  compare->add_option("dirs", run_dirs, "run directories")->expected(-1);

  CLI11_PARSE(app, argc, argv);
  tf.per_phase_explicit = per_phase->count() > 0;

  try {
    if (partition->parsed())
      return cmd_partition(kb_path, tau, ptau->count() > 0, dot_path);
    if (train->parsed()) return cmd_train(tf);
    if (abspace->parsed())
      return cmd_abspace(ab_base, ab_digits, ab_tau, atau->count() > 0, ab_out);
    if (entail->parsed()) return cmd_entail_check(ec_kb, ec_tau, ec_samples, ec_seed);
    if (compare->parsed()) return cmd_compare(run_dirs);
  } catch (const cabl::logic::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const cabl::logic::KbError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
