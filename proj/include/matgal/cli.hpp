// SPDX-License-Identifier: Apache-2.0
#pragma once

// Command-line front end: sample, logpdf, cf, transform, check.
//
// Exit codes: 0 success, 1 invalid input (parameters, files, shapes),
// 2 a check in the verification suite failed, 64 usage error.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "matgal/distributions.hpp"
#include "matgal/error.hpp"
#include "matgal/io.hpp"
#include "matgal/validation.hpp"

namespace matgal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitCheckFailed = 2;
inline constexpr int kExitUsage = 64;

namespace detail {

class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw ParseError("cannot write " + path);
      out_ = file_.get();
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

inline std::vector<double> parse_point(const std::string& text) {
  std::vector<double> values;
  std::string cell;
  std::string normalized = text;
  for (char& c : normalized) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream in(normalized);
  while (in >> cell) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != cell.size()) throw ParseError("--point: '" + cell + "' is not a number");
    values.push_back(v);
  }
  if (values.empty()) throw ParseError("--point: no values");
  return values;
}

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline void write_cf_csv(std::ostream& out, const Params& p, const std::vector<Vector>& grid) {
  const auto names = io::vec_column_names(dims_of(p), "t");
  for (const auto& n : names) out << n << ",";
  out << "re,im\n";
  for (const auto& t : grid) {
    const Complex v = cf(p, t);
    for (Eigen::Index i = 0; i < t.size(); ++i) out << io::format_double(t[i]) << ",";
    out << io::format_double(v.real()) << "," << io::format_double(v.imag()) << "\n";
  }
}

}  // namespace detail

/// Entry point; `out`/`err` receive what would go to stdout/stderr.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Matrix and tensor variate (generalized) asymmetric Laplace distributions"};
  app.require_subcommand(1);

  std::string params_path;
  std::string out_path;

  auto* sample = app.add_subcommand("sample", "Draw from the law via its mixture representation");
  std::size_t count = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  sample->add_option("--params", params_path, "parameter file (JSON)")->required();
  sample->add_option("--count", count, "number of draws")->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed, "64-bit seed")->required();
  sample->add_option("--out", out_path, "output CSV (default stdout)");
  sample->add_option("--threads", threads, "worker threads; output does not depend on it");

  auto* logpdf = app.add_subcommand("logpdf", "Evaluate the log-density");
  std::string point;
  std::string batch_path;
  logpdf->add_option("--params", params_path, "parameter file (JSON)")->required();
  auto* point_opt = logpdf->add_option("--point", point, "one point in vec order, comma separated");
  auto* batch_opt = logpdf->add_option("--batch", batch_path, "CSV of points, one per row");
  point_opt->excludes(batch_opt);
  logpdf->add_option("--out", out_path, "output file (default stdout)");

  auto* cfc = app.add_subcommand("cf", "Evaluate the characteristic function");
  std::string grid_path;
  bool auto_grid = false;
  cfc->add_option("--params", params_path, "parameter file (JSON)")->required();
  auto* grid_opt = cfc->add_option("--grid", grid_path, "CSV of frequencies in vec order");
  auto* auto_opt = cfc->add_flag("--auto-grid", auto_grid, "use the built-in 20-point grid");
  grid_opt->excludes(auto_opt);
  cfc->add_option("--seed", seed, "seed for --auto-grid");
  cfc->add_option("--out", out_path, "output CSV (default stdout)");

  auto* transform = app.add_subcommand("transform", "Parameters of D X C");
  std::string left_path;
  std::string right_path;
  transform->add_option("--params", params_path, "parameter file (JSON, mal or mgal)")->required();
  transform->add_option("--left", left_path, "D as CSV (m x k); identity if omitted");
  transform->add_option("--right", right_path, "C as CSV (n x q); identity if omitted");
  transform->add_option("--out", out_path, "output parameter file (default stdout)");

  auto* check = app.add_subcommand("check", "Run the verification suite");
  std::string suite_name = "fast";
  check->add_option("--params", params_path, "parameter file (JSON)")->required();
  check->add_option("--suite", suite_name, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  check->add_option("--seed", seed, "64-bit seed")->required();
  check->add_option("--out", out_path, "NDJSON report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    const io::ParamsFile pf = io::parse_params(params_path);
    const Params& p = pf.params;

    if (sample->parsed()) {
      const SampleBatch b = sample_sharded(p, count, seed, threads);
      detail::OutputTarget target(out_path, out);
      io::write_sample_csv(target.stream(), b, io::family_name(pf.family));
      return kExitOk;
    }

    if (logpdf->parsed()) {
      if (point_opt->count() == 0 && batch_opt->count() == 0) {
        err << "error: logpdf needs --point or --batch\n";
        return kExitUsage;
      }
      std::vector<std::vector<double>> rows;
      if (point_opt->count() > 0) {
        rows.push_back(detail::parse_point(point));
      } else {
        rows = io::read_numeric_csv_file(batch_path);
      }
      detail::OutputTarget target(out_path, out);
      for (const auto& r : rows) {
        target.stream() << io::format_double(log_pdf(p, detail::to_vector(r))) << "\n";
      }
      return kExitOk;
    }

    if (cfc->parsed()) {
      if (grid_opt->count() == 0 && !auto_grid) {
        err << "error: cf needs --grid or --auto-grid\n";
        return kExitUsage;
      }
      std::vector<Vector> grid;
      if (auto_grid) {
        grid = validation::make_cf_grid(p, seed).points;
      } else {
        for (const auto& r : io::read_numeric_csv_file(grid_path)) grid.push_back(detail::to_vector(r));
      }
      detail::OutputTarget target(out_path, out);
      detail::write_cf_csv(target.stream(), p, grid);
      return kExitOk;
    }

    if (transform->parsed()) {
      if (!io::is_matrix_family(pf.family)) {
        throw ValidationError("transform: only the matrix families (mal, mgal) are supported");
      }
      const auto& mp = std::get<MgalParams>(p);
      const auto k = static_cast<Eigen::Index>(mp.rows());
      const auto n = static_cast<Eigen::Index>(mp.cols());
      const Matrix d = left_path.empty() ? Matrix(Matrix::Identity(k, k)) : io::read_matrix_csv(left_path);
      const Matrix c = right_path.empty() ? Matrix(Matrix::Identity(n, n)) : io::read_matrix_csv(right_path);
      const io::ParamsFile result{pf.family, transform_mgal(mp, d, c)};
      detail::OutputTarget target(out_path, out);
      target.stream() << io::params_to_json(result).dump(2) << "\n";
      return kExitOk;
    }

    if (check->parsed()) {
      const auto suite = suite_name == "full" ? validation::Suite::full : validation::Suite::fast;
      const auto reports = validation::run_suite(p, suite, seed);
      detail::OutputTarget target(out_path, out);
      bool all = true;
      for (const auto& r : reports) {
        target.stream() << r.to_ndjson() << "\n";
        all = all && r.passed;
      }
      return all ? kExitOk : kExitCheckFailed;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitUsage;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("matgal");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace matgal::cli
