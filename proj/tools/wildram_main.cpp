#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wildram/cli.hpp"

namespace {

void add_common(CLI::App* cmd, wildram::cli::RunConfig& cfg, std::string& format) {
  cmd->add_option("--p", cfg.p, "residue characteristic");
  cmd->add_option("--m", cfg.m, "residue extension degree (informational; file headers decide)");
  cmd->add_option("--precision", cfg.precision, "series precision N");
  cmd->add_option("--pdigits", cfg.pdigits, "starting p-adic digit count M");
  cmd->add_option("--nmax", cfg.n_max, "largest break index n to certify");
  cmd->add_option("--bound", cfg.bound, "joint filtration break bound");
  cmd->add_option("--level", cfg.level, "joint filtration exponent level K");
  cmd->add_option("--window-start", cfg.window_start, "first window used for classification");
  cmd->add_option("--seed", cfg.seed, "seed for sampled suites (outputs stay deterministic)");
  cmd->add_option("--format", format, "output format: records | table")
      ->check(CLI::IsMember({"records", "table"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ramification data of wild power-series automorphisms"};
  app.require_subcommand(1);

  wildram::cli::RunConfig cfg;
  std::string format = "records";

  auto* breaks = app.add_subcommand("breaks", "break sequence and rank-1 classification");
  breaks->add_option("--input", cfg.inputs, "series file")->required()->expected(1);
  add_common(breaks, cfg, format);

  auto* lt = app.add_subcommand("lubin-tate", "construct a reduced Lubin-Tate endomorphism");
  lt->add_option("--kind", cfg.kind, "base ring: qp | unramified | ramified");
  lt->add_option("--alpha", cfg.alpha, "unit coordinates, e.g. 1,1 for 1+pi")->required();
  lt->add_option("--out", cfg.output, "series file to write")->required();
  add_common(lt, cfg, format);

  auto* cls = app.add_subcommand("classify2", "rank-2 classification and ramification index");
  cls->add_option("--sigma", cfg.inputs, "first generator series file")->required()->expected(1);
  std::string tau_path;
  cls->add_option("--tau", tau_path, "second generator series file")->required();
  add_common(cls, cfg, format);

  auto* phi = app.add_subcommand("phi", "exact Hasse-Herbrand function from a break table");
  phi->add_option("--breaks", cfg.breaks_list, "lower breaks, e.g. 2,8,26")->required();
  phi->add_option("--indices", cfg.indices_list, "index after each break, e.g. 3,9,27")->required();
  phi->add_option("--horizon", cfg.horizon, "completeness horizon (default: last break)");
  phi->add_option("--eval", cfg.eval_at, "evaluate phi at a rational");
  phi->add_option("--psi-eval", cfg.psi_at, "evaluate psi at a rational");
  add_common(phi, cfg, format);

  auto* sen = app.add_subcommand("sen", "p-power congruence check of a break sequence");
  sen->add_option("--input", cfg.inputs, "series file")->expected(1);
  sen->add_option("--values", cfg.values, "break values, e.g. 2,26,242");
  add_common(sen, cfg, format);

  CLI11_PARSE(app, argc, argv);
  cfg.format = format == "table" ? wildram::cli::OutputFormat::Table
                                 : wildram::cli::OutputFormat::Records;

  if (breaks->parsed()) return wildram::cli::run_breaks(cfg, std::cout, std::cerr);
  if (lt->parsed()) return wildram::cli::run_lubin_tate(cfg, std::cout, std::cerr);
  if (cls->parsed()) {
    cfg.inputs.push_back(tau_path);
    return wildram::cli::run_classify2(cfg, std::cout, std::cerr);
  }
  if (phi->parsed()) return wildram::cli::run_phi(cfg, std::cout, std::cerr);
  if (sen->parsed()) return wildram::cli::run_sen(cfg, std::cout, std::cerr);
  return wildram::cli::exit_code::kBadInput;
}
