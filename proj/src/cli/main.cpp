#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "commands.hpp"
#include "gc/errors.hpp"

namespace {

int error_json(const std::string& code, const std::string& message, int exitCode) {
  nlohmann::ordered_json j;
  j["error"]["code"] = code;
  j["error"]["message"] = message;
  std::cout << gc::dump_json17(j, 2) << "\n";
  return exitCode;
}

bool config_class(const std::string& code) {
  return code == "ConfigError" || code == "SyntaxError" || code == "UnknownAtom" ||
         code == "ArityError";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-periodic symbol calculus, gauge transforms, Floquet spectra, "
               "and resonance-geometry experiments"};
  app.require_subcommand(1);

  gc::cli::CliOptions opt;
  const char* names[] = {"bands", "ids", "overlap", "bs-scan",
                         "gauge", "uncouple", "geometry", "verify"};
  const char* descs[] = {
      "band table over a quasi-momentum grid, written as CSV",
      "integrated density of states over the spectra window",
      "band-overlap margin on a lambda grid",
      "overlap scan with spectral-gap detection",
      "one gauge rotation (weak or parallel) with a norm ledger",
      "uncoupling rotation for systems, with a norm ledger",
      "Monte-Carlo resonance-geometry volumes and certificates",
      "run the invariant suite and report per-property residuals"};

  for (int i = 0; i < 8; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], descs[i]);
    sub->add_option("--config", opt.configPath, "experiment config JSON");
    sub->add_option("--out", opt.outDir, "output directory (overrides output.dir)");
    sub->add_option("--seed", opt.seed, "seed override for sampling commands");
    sub->add_option("--threads", opt.threads, "OpenMP thread count")
        ->envname("GAUGECALC_THREADS");
    sub->add_flag("--verbose", opt.verbose, "progress notes on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return error_json("ConfigError", e.what(), gc::cli::kExitConfig);
  }

  CLI::App* sub = app.get_subcommands().front();
  opt.hasSeed = sub->count("--seed") > 0;
#ifdef _OPENMP
  if (opt.threads > 0) omp_set_num_threads(opt.threads);
#endif

  try {
    return gc::cli::run_command(sub->get_name(), opt);
  } catch (const gc::Error& e) {
    const int rc = config_class(e.code()) ? gc::cli::kExitConfig : gc::cli::kExitNumerical;
    return error_json(e.code(), e.what(), rc);
  } catch (const std::exception& e) {
    return error_json("InternalError", e.what(), gc::cli::kExitNumerical);
  }
}
