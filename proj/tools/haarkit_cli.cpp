// haarkit CLI: transforms, the 4x4 quantum pipeline, cost reports, and the
// toy training demo. Every command is deterministic given --seed (or the
// HAARKIT_SEED environment variable when the flag is absent); outputs are
// written whole-file via temp+rename, so failures leave no partial files.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "haarkit/costs.hpp"
#include "haarkit/haar.hpp"
#include "haarkit/io.hpp"
#include "haarkit/layer.hpp"
#include "haarkit/matrix.hpp"
#include "haarkit/qsim.hpp"
#include "haarkit/toy.hpp"

namespace {

using haarkit::Matrix;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("HAARKIT_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw std::runtime_error("HAARKIT_SEED is not an unsigned integer");
    }
    return v;
  }
  return 0;
}

Matrix load_patch(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    const nlohmann::json j = nlohmann::json::parse(haarkit::read_text_file(path));
    return haarkit::matrix_from_json(j);
  }
  return haarkit::read_matrix_csv(path);
}

haarkit::HaarVariant parse_variant(const std::string& name) {
  if (name == "orthonormal") return haarkit::HaarVariant::Orthonormal;
  if (name == "integer") return haarkit::HaarVariant::IntegerAddSub;
  throw std::runtime_error("unknown variant '" + name + "' (expected orthonormal|integer)");
}

int cmd_transform(const std::string& input, const std::string& output, bool inverse,
                  int levels, const std::string& variant_name) {
  const haarkit::HaarVariant variant = parse_variant(variant_name);
  Matrix m = haarkit::read_matrix_csv(input);
  const auto axis_plan = [&](std::size_t n) {
    return levels == 0 ? haarkit::HaarPlan::full_depth(n, variant)
                       : haarkit::HaarPlan::make(n, levels, variant);
  };
  if (m.rows() == 1) {
    const haarkit::HaarPlan plan = axis_plan(static_cast<std::size_t>(m.cols()));
    std::span<double> row(m.data(), static_cast<std::size_t>(m.cols()));
    if (inverse) {
      haarkit::idwt1d_inplace(row, plan);
    } else {
      haarkit::dwt1d_inplace(row, plan);
    }
  } else {
    const haarkit::HaarPlan row_plan = axis_plan(static_cast<std::size_t>(m.cols()));
    const haarkit::HaarPlan col_plan = axis_plan(static_cast<std::size_t>(m.rows()));
    if (inverse) {
      haarkit::idwt2d_inplace(m.data(), static_cast<std::size_t>(m.rows()),
                              static_cast<std::size_t>(m.cols()), row_plan, col_plan);
    } else {
      haarkit::dwt2d_inplace(m.data(), static_cast<std::size_t>(m.rows()),
                             static_cast<std::size_t>(m.cols()), row_plan, col_plan);
    }
  }
  haarkit::write_matrix_csv(output, m);
  return 0;
}

int cmd_quantum(const std::string& input, const std::string& output,
                const std::string& mode_name, std::uint64_t shots, std::uint64_t seed) {
  const Matrix patch = load_patch(input);
  haarkit::ReadoutMode mode;
  if (mode_name == "exact") {
    mode = haarkit::ReadoutMode::ExactStatevector;
  } else if (mode_name == "shots") {
    mode = haarkit::ReadoutMode::ShotMagnitudes;
  } else {
    throw std::runtime_error("unknown mode '" + mode_name + "' (expected exact|shots)");
  }
  const Matrix result = haarkit::run_2d_haar_quantum(patch, mode, shots, seed);
  const Matrix classical =
      haarkit::dwt2d(patch, haarkit::HaarPlan::full_depth(4));
  Matrix reference = classical;
  if (mode == haarkit::ReadoutMode::ShotMagnitudes) {
    // magnitudes carry no signs; compare against |classical|
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) reference(r, c) = std::abs(reference(r, c));
  }

  nlohmann::json report;
  report["mode"] = mode_name;
  report["shots"] = mode == haarkit::ReadoutMode::ShotMagnitudes ? shots : 0;
  report["seed"] = seed;
  nlohmann::json coeffs = nlohmann::json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) coeffs.push_back(result(r, c));
  report["coefficients"] = std::move(coeffs);
  report["mse_vs_classical"] = haarkit::mse(result, reference);
  report["eps_max"] = haarkit::max_abs_error(reference, result);
  report["gates"] = haarkit::gates_to_json(haarkit::haar_circuit());
  haarkit::write_text_file(output, report.dump(2) + "\n");
  return 0;
}

int cmd_mse(const std::string& a_path, const std::string& b_path) {
  const Matrix a = haarkit::read_matrix_csv(a_path);
  const Matrix b = haarkit::read_matrix_csv(b_path);
  std::printf("%s\n", haarkit::format_g17(haarkit::mse(a, b)).c_str());
  return 0;
}

int cmd_noise(const std::string& input, const std::string& output, std::vector<double> ps,
              std::uint64_t trials, std::uint64_t seed) {
  if (ps.empty()) throw std::runtime_error("need at least one --p value");
  if (trials == 0) throw std::runtime_error("--trials must be positive");
  const Matrix patch = load_patch(input);
  const Matrix ideal =
      haarkit::run_2d_haar_quantum(patch, haarkit::ReadoutMode::ExactStatevector);

  nlohmann::json sweep = nlohmann::json::array();
  for (std::size_t pi = 0; pi < ps.size(); ++pi) {
    const double p = ps[pi];
    double sum = 0.0;
    double worst = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      const std::uint64_t trial_seed = haarkit::derive_seed(seed, pi * trials + t);
      const Matrix noisy = haarkit::pauli_noise_trial(patch, p, trial_seed);
      const double eps = haarkit::max_abs_error(ideal, noisy);
      sum += eps;
      if (eps > worst) worst = eps;
    }
    sweep.push_back({{"p", p},
                     {"mean_eps_max", sum / static_cast<double>(trials)},
                     {"max_eps_max", worst}});
  }
  nlohmann::json report;
  report["seed"] = seed;
  report["trials"] = trials;
  report["placement"] = "after_circuit";
  report["sweep"] = std::move(sweep);
  haarkit::write_text_file(output, report.dump(2) + "\n");
  return 0;
}

int cmd_cost(const std::string& model_path, const std::string& baseline_path,
             const std::string& resnet_variant, int paths, const std::string& output) {
  nlohmann::json report;
  if (!resnet_variant.empty()) {
    haarkit::Resnet20Variant variant;
    if (resnet_variant == "baseline") {
      variant = haarkit::Resnet20Variant::Baseline;
    } else if (resnet_variant == "ht") {
      variant = haarkit::Resnet20Variant::HtPerceptron;
    } else if (resnet_variant == "hwt") {
      variant = haarkit::Resnet20Variant::HwtPerceptron;
    } else {
      throw std::runtime_error("unknown resnet20 variant '" + resnet_variant +
                               "' (expected baseline|ht|hwt)");
    }
    const std::uint64_t count = haarkit::resnet20_params(variant, paths);
    report["resnet20_variant"] = resnet_variant;
    if (variant != haarkit::Resnet20Variant::Baseline) report["paths"] = paths;
    report["params"] = count;
    const std::uint64_t base = haarkit::resnet20_baseline_params();
    report["baseline_params"] = base;
    report["param_ratio"] = static_cast<double>(count) / static_cast<double>(base);
  } else {
    const std::vector<haarkit::LayerSpec> model = haarkit::layer_specs_from_json(
        nlohmann::json::parse(haarkit::read_text_file(model_path)));
    haarkit::CostReport cost;
    if (!baseline_path.empty()) {
      const std::vector<haarkit::LayerSpec> baseline = haarkit::layer_specs_from_json(
          nlohmann::json::parse(haarkit::read_text_file(baseline_path)));
      cost = haarkit::cost_report(model, baseline);
    } else {
      cost = haarkit::cost_report(model);
    }
    report = haarkit::cost_report_to_json(cost);
  }
  haarkit::write_text_file(output, report.dump(2) + "\n");
  return 0;
}

int cmd_train_demo(int epochs, double lr, std::uint64_t seed, int samples,
                   const std::string& output) {
  const haarkit::ToyDataset ds = haarkit::make_stripes_dataset(samples, seed);
  const haarkit::ToyTrainResult result = haarkit::train_toy(ds, epochs, lr, seed);
  haarkit::write_text_file(output, haarkit::trace_to_csv(result.trace));
  if (result.trace.empty()) {
    std::printf("no epochs run; trace header written to %s\n", output.c_str());
  } else {
    const haarkit::TraceRow& last = result.trace.back();
    std::printf("epochs=%d final_loss=%s final_accuracy=%s\n", epochs,
                haarkit::format_g17(last.loss).c_str(),
                haarkit::format_g17(last.accuracy).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Haar transform toolkit: classical transforms, a 4x4 quantum pipeline, "
               "cost reports, and a toy training demo"};
  app.require_subcommand(1);

  std::string input, output, variant = "orthonormal", mode = "exact";
  std::string model_path, baseline_path, resnet_variant;
  bool inverse = false;
  int levels = 0;
  int paths = 1;
  int epochs = 200;
  int samples = 200;
  double lr = 0.05;
  std::uint64_t shots = 20000;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 0;
  std::vector<double> ps;

  CLI::App* transform = app.add_subcommand("transform", "Forward or inverse transform of a CSV matrix");
  transform->add_option("input", input, "input CSV (1 row for 1D, else 2D power-of-two matrix)")->required();
  transform->add_option("-o,--output", output, "output CSV path")->required();
  transform->add_flag("--inverse", inverse, "apply the inverse transform");
  transform->add_option("--levels", levels, "decomposition levels (0 = full depth)");
  transform->add_option("--variant", variant, "orthonormal|integer");

  CLI::App* quantum = app.add_subcommand("quantum", "Run the 4x4 patch through the quantum pipeline");
  quantum->add_option("input", input, "4x4 patch, CSV or JSON array-of-arrays")->required();
  quantum->add_option("-o,--output", output, "output JSON report path")->required();
  quantum->add_option("--mode", mode, "exact|shots");
  quantum->add_option("--shots", shots, "measurement count for shots mode");
  CLI::Option* quantum_seed = quantum->add_option("--seed", seed, "RNG seed");

  CLI::App* mse_cmd = app.add_subcommand("mse", "Mean squared error between two CSV matrices");
  std::string mse_a, mse_b;
  mse_cmd->add_option("a", mse_a, "first CSV matrix")->required();
  mse_cmd->add_option("b", mse_b, "second CSV matrix")->required();

  CLI::App* noise = app.add_subcommand("noise", "Pauli-noise sweep over the quantum pipeline");
  noise->add_option("input", input, "4x4 patch, CSV or JSON")->required();
  noise->add_option("-o,--output", output, "output JSON report path")->required();
  noise->add_option("--p", ps, "per-qubit error probabilities")->expected(-1);
  noise->add_option("--trials", trials, "trials per probability");
  CLI::Option* noise_seed = noise->add_option("--seed", seed, "RNG seed");

  CLI::App* cost = app.add_subcommand("cost", "MAC/parameter report for a model description");
  cost->add_option("--model", model_path, "model JSON (list of layer specs)");
  cost->add_option("--baseline", baseline_path, "baseline model JSON for reduction");
  cost->add_option("--resnet20", resnet_variant, "builtin inventory: baseline|ht|hwt");
  cost->add_option("--paths", paths, "path count for resnet20 ht|hwt");
  cost->add_option("-o,--output", output, "output JSON report path")->required();

  CLI::App* train = app.add_subcommand("train-demo", "Train the toy stripes classifier");
  train->add_option("--epochs", epochs, "training epochs");
  train->add_option("--lr", lr, "learning rate");
  train->add_option("--samples", samples, "dataset size");
  CLI::Option* train_seed = train->add_option("--seed", seed, "RNG seed");
  train->add_option("-o,--output", output, "output CSV trace path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (transform->parsed()) return cmd_transform(input, output, inverse, levels, variant);
    if (quantum->parsed()) {
      if (!*quantum_seed) seed = default_seed();
      return cmd_quantum(input, output, mode, shots, seed);
    }
    if (mse_cmd->parsed()) return cmd_mse(mse_a, mse_b);
    if (noise->parsed()) {
      if (!*noise_seed) seed = default_seed();
      if (ps.empty()) ps = {0.01, 0.05, 0.1};
      return cmd_noise(input, output, ps, trials, seed);
    }
    if (cost->parsed()) {
      if (model_path.empty() == resnet_variant.empty()) {
        throw std::runtime_error("cost: pass exactly one of --model or --resnet20");
      }
      return cmd_cost(model_path, baseline_path, resnet_variant, paths, output);
    }
    if (train->parsed()) {
      if (!*train_seed) seed = default_seed();
      return cmd_train_demo(epochs, lr, seed, samples, output);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::fprintf(stderr, "error: no subcommand\n");
  return 1;
}
