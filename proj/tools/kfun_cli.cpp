// kfun: list and run the numerical experiments.
//
//   kfun list
//   kfun run --suite bbm --n 1 --p 2 --out out
//   kfun run --experiment c_alpha --experiment milman --jobs 2
//
// exit status: 0 every row passed, 1 some row failed, 2 bad input

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include <kfun/kfun.hpp>

namespace {

struct RunArgs {
  std::string suite, out = "out", config;
  std::vector<std::string> experiments;
  int jobs = 1;
  // flag -> value, only for flags given on the command line
  std::map<std::string, std::string> settings;
};

int do_list() {
  for (const auto& e : kfun::catalog()) std::cout << e.id << '\t' << e.suite << '\t' << e.theorem << '\n';
  return 0;
}

int do_run(const RunArgs& a) {
  kfun::ConfigFile file;
  if (!a.config.empty()) file = kfun::ConfigFile::read(a.config);

  std::vector<std::string> ids;
  if (!a.suite.empty()) ids = kfun::suite_ids(a.suite);
  for (const auto& e : a.experiments) {
    kfun::find_experiment(e);
    if (std::find(ids.begin(), ids.end(), e) == ids.end()) ids.push_back(e);
  }
  if (ids.empty()) ids = kfun::suite_ids("all");

  // file first, then its section for the experiment, then the command line
  std::vector<kfun::RunConfig> cfgs;
  for (const auto& id : ids) {
    kfun::RunConfig c;
    for (const auto& [k, v] : file.global) kfun::apply_setting(c, k, v);
    if (auto it = file.sections.find(id); it != file.sections.end())
      for (const auto& [k, v] : it->second) kfun::apply_setting(c, k, v);
    for (const auto& [k, v] : a.settings) kfun::apply_setting(c, k, v);
    cfgs.push_back(c);
  }

  auto results = kfun::run(cfgs, ids, a.jobs);
  kfun::write_reports(a.out, results, cfgs);

  int failed = 0;
  for (const auto& r : results) {
    std::cout << (r.pass() ? "PASS " : "FAIL ") << r.id << "  (" << r.rows.size() << " rows)\n";
    for (const auto& f : r.failing()) {
      std::cout << "  failing: " << f << '\n';
      ++failed;
    }
  }
  std::cout << "reports in " << a.out << '\n';
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical K-functionals, moduli of smoothness and their limits"};
  app.require_subcommand(1);
  auto* list = app.add_subcommand("list", "list experiments");
  auto* run = app.add_subcommand("run", "run experiments and write reports");

  RunArgs a;
  run->add_option("--suite", a.suite, "suite name or 'all'");
  run->add_option("--experiment", a.experiments, "experiment id (repeatable)");
  run->add_option("--out", a.out, "report directory");
  run->add_option("--config", a.config, "ini file with settings");
  run->add_option("--jobs", a.jobs, "worker threads")->check(CLI::PositiveNumber);
  std::map<std::string, std::string> raw;
  for (const char* key : {"n", "p", "k", "alpha", "family", "eps-grid", "resolution", "oracle", "seed"})
    run->add_option(std::string("--") + key, raw[key]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*list) return do_list();
    for (const auto& [k, v] : raw)
      if (run->count("--" + k)) a.settings[k] = v;
    return do_run(a);
  } catch (const kfun::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
