#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "opext/cli.hpp"

namespace {

int emit(const opext::cli::Response& r, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << r.text;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      std::cerr << "cannot write " << out_path << "\n";
      return 2;
    }
    f << r.text;
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace opext::cli;
  CLI::App app{"Extensions and completions of partial operators on C^n"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags flags;
  std::string out_path;
  double tol_rank = 0, tol_psd = 0, tol_eq = 0;
  std::string endpoint;
  app.add_option("--out", out_path, "write the result here instead of standard output");
  auto* o_rank = app.add_option("--tol-rank", tol_rank, "relative rank cutoff factor");
  auto* o_psd = app.add_option("--tol-psd", tol_psd, "PSD / Loewner slack");
  auto* o_eq = app.add_option("--tol-eq", tol_eq, "equality slack for postconditions");
  app.add_option("--seed", flags.seed, "seed for every random choice");
  auto* o_end = app.add_option("--endpoint", endpoint, "completion read from the min, max or mid extension")
                    ->check(CLI::IsMember({"min", "max", "mid"}));

  std::string input;
  for (const std::string& k : kinds()) {
    app.add_subcommand(k, "run the " + k + " pipeline on an instance file")
        ->add_option("input", input, "instance file, - for standard input")
        ->required();
  }

  std::string kind, dims_csv;
  std::size_t count = 100;
  long long n = 0;
  auto* verify_cmd = app.add_subcommand("verify", "generate random instances and check every invariant");
  verify_cmd->add_option("--kind", kind)->required();
  verify_cmd->add_option("--count", count);
  verify_cmd->add_option("--dims", dims_csv, "comma-separated dimensions");
  auto* gen_cmd = app.add_subcommand("gen", "write a random instance file");
  gen_cmd->add_option("--kind", kind)->required();
  gen_cmd->add_option("--dims", dims_csv, "comma-separated dimensions");
  auto* o_n = gen_cmd->add_option("--n", n, "ambient dimension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (o_rank->count()) flags.tol_rank = tol_rank;
  if (o_psd->count()) flags.tol_psd = tol_psd;
  if (o_eq->count()) flags.tol_eq = tol_eq;
  if (o_end->count()) flags.endpoint = parse_endpoint(endpoint);

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "gen" || name == "verify") {
    std::vector<opext::Index> dims;
    try {
      dims = parse_dims(dims_csv);
      if (o_n->count()) dims.insert(dims.begin(), static_cast<opext::Index>(n));
    } catch (const opext::Error& e) {
      return emit(error_response(kind, e, flags.seed), out_path);
    }
    if (name == "gen") return emit(gen(kind, dims, flags.seed), out_path);
    return emit(verify(kind, count, flags.seed, dims, flags), out_path);
  }
  return emit(run_file(name, input, flags), out_path);
}
