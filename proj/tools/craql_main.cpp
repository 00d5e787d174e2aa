// craql: run query lists over project lists, collate outputs, generate properties.
#include <iostream>

#include "CLI11.hpp"
#include "craql/runner.hpp"

namespace fs = std::filesystem;
using namespace craql;

namespace {

fs::path resolve_list(const fs::path& root, const fs::path& list) {
  if (list.is_absolute() || fs::exists(list)) return list;
  return root / list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CRAQL batch query runner"};
  app.require_subcommand(0, 1);

  fs::path root = ".";
  fs::path project_list, query_list;
  std::size_t jobs = 1;
  std::size_t recursion_limit = 512;
  app.add_option("--dirs", root, "Directory holding projects/, queries/, properties/, results/");
  app.add_option("-P,--projects", project_list, "Project list file");
  app.add_option("-Q,--queries", query_list, "Query list file");
  app.add_option("--jobs", jobs, "Projects evaluated concurrently")->check(CLI::PositiveNumber);
  app.add_option("--recursion-limit", recursion_limit, "Maximum callquery depth")->check(CLI::PositiveNumber);

  auto* collate = app.add_subcommand("collate", "Collate <project>.vars files into craql_output.csv");
  auto* genprops = app.add_subcommand("genprops", "Write <project>.properties files from projecttags.csv");

  CLI11_PARSE(app, argc, argv);

  runner::RunConfig config = runner::RunConfig::under(root);
  try {
    if (collate->parsed()) {
      std::cout << runner::collate_csv(config.results_dir).string() << "\n";
      return 0;
    }
    if (genprops->parsed()) {
      for (const auto& p : runner::generate_props(config.properties_dir)) std::cout << p.string() << "\n";
      return 0;
    }
    if (project_list.empty() || query_list.empty()) {
      std::cerr << "craql: both -P <projectlist> and -Q <querylist> are required\n" << app.help();
      return 2;
    }
    config.project_list = resolve_list(root, project_list);
    config.query_list = resolve_list(root, query_list);
    config.jobs = jobs;
    config.recursion_limit = recursion_limit;
    return runner::run_batch(config, std::cout, std::cerr).exit_status;
  } catch (const query::SyntaxError& e) {
    std::cerr << "craql: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "craql: " << e.what() << "\n";
    return 2;
  }
}
