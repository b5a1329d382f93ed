#pragma once

// Serialization: CSV for matrices and loss traces (full '%.17g' precision,
// so round-trips and byte-comparisons are exact), JSON for structured
// reports, gate lists, and layer-parameter checkpoints. File writes go
// through a temp-file-and-rename so a failed run never leaves a partial
// output behind.

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "haarkit/costs.hpp"
#include "haarkit/layer.hpp"
#include "haarkit/matrix.hpp"
#include "haarkit/qsim.hpp"
#include "haarkit/toy.hpp"

namespace haarkit {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_g17(m(r, c));
    }
    out += '\n';
  }
  return out;
}

inline Matrix parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      const std::string field = line.substr(pos, comma - pos);
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || *end != '\0' || errno == ERANGE) {
        throw std::runtime_error("CSV: bad numeric field '" + field + "'");
      }
      row.push_back(v);
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("CSV: inconsistent column count at row " +
                               std::to_string(rows.size() + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("CSV: no data rows");
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  return m;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read failed for '" + path + "'");
  return buf.str();
}

// Whole-file write via temp file + rename: readers never observe a partial
// file, and a failure leaves the destination untouched.
inline void write_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed for '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot move temp file onto '" + path + "'");
  }
}

inline Matrix read_matrix_csv(const std::string& path) {
  return parse_matrix_csv(read_text_file(path));
}

inline void write_matrix_csv(const std::string& path, const Matrix& m) {
  write_text_file(path, matrix_to_csv(m));
}

inline std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::string out = "epoch,loss,accuracy\n";
  for (const TraceRow& row : trace) {
    out += std::to_string(row.epoch);
    out += ',';
    out += format_g17(row.loss);
    out += ',';
    out += format_g17(row.accuracy);
    out += '\n';
  }
  return out;
}

// ---- JSON ------------------------------------------------------------------

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::runtime_error("JSON matrix: expected array of rows");
  const auto rows = static_cast<int>(j.size());
  const auto cols = static_cast<int>(j.at(0).size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const nlohmann::json& row = j.at(r);
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw std::runtime_error("JSON matrix: ragged rows");
    }
    for (int c = 0; c < cols; ++c) m(r, c) = row.at(c).get<double>();
  }
  return m;
}

inline const char* gate_kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::I: return "I";
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::Swap: return "SWAP";
    case GateKind::CH: return "CH";
  }
  throw std::runtime_error("unknown gate kind");
}

inline nlohmann::json gates_to_json(const GateSeq& seq) {
  nlohmann::json out = nlohmann::json::array();
  for (const Gate& g : seq) {
    nlohmann::json qubits = nlohmann::json::array();
    qubits.push_back(g.q0);
    if (g.kind == GateKind::Swap || g.kind == GateKind::CH) qubits.push_back(g.q1);
    out.push_back({{"kind", gate_kind_name(g.kind)}, {"qubits", std::move(qubits)}});
  }
  return out;
}

inline GateSeq gates_from_json(const nlohmann::json& j) {
  GateSeq seq;
  for (const nlohmann::json& item : j) {
    const std::string kind = item.at("kind").get<std::string>();
    const nlohmann::json& qubits = item.at("qubits");
    const auto q = [&](std::size_t i) { return qubits.at(i).get<int>(); };
    if (kind == "I") {
      seq.push_back(Gate::i(q(0)));
    } else if (kind == "H") {
      seq.push_back(Gate::h(q(0)));
    } else if (kind == "X") {
      seq.push_back(Gate::x(q(0)));
    } else if (kind == "SWAP") {
      seq.push_back(Gate::swap(q(0), q(1)));
    } else if (kind == "CH") {
      seq.push_back(Gate::ch(q(0), q(1)));
    } else {
      throw std::runtime_error("unknown gate kind '" + kind + "'");
    }
  }
  return seq;
}

inline nlohmann::json params_to_json(const LayerParams& p) {
  p.validate();
  nlohmann::json j;
  j["paths"] = p.paths;
  j["c_in"] = p.c_in;
  j["c_out"] = p.c_out;
  j["height"] = p.height;
  j["width"] = p.width;
  j["threshold_mode"] =
      p.threshold_mode == ThresholdMode::Softplus ? "softplus" : "hard_zero";
  j["residual"] = p.residual;
  j["scale"] = nlohmann::json::array();
  j["mix"] = nlohmann::json::array();
  j["threshold_raw"] = nlohmann::json::array();
  for (int i = 0; i < p.paths; ++i) {
    j["scale"].push_back(matrix_to_json(p.scale[i]));
    j["mix"].push_back(matrix_to_json(p.mix[i]));
    j["threshold_raw"].push_back(matrix_to_json(p.threshold_raw[i]));
  }
  return j;
}

inline LayerParams params_from_json(const nlohmann::json& j) {
  LayerParams p;
  p.paths = j.at("paths").get<int>();
  p.c_in = j.at("c_in").get<int>();
  p.c_out = j.at("c_out").get<int>();
  p.height = j.at("height").get<int>();
  p.width = j.at("width").get<int>();
  const std::string mode = j.at("threshold_mode").get<std::string>();
  if (mode == "softplus") {
    p.threshold_mode = ThresholdMode::Softplus;
  } else if (mode == "hard_zero") {
    p.threshold_mode = ThresholdMode::HardZero;
  } else {
    throw std::runtime_error("unknown threshold_mode '" + mode + "'");
  }
  p.residual = j.at("residual").get<bool>();
  for (int i = 0; i < p.paths; ++i) {
    p.scale.push_back(matrix_from_json(j.at("scale").at(i)));
    p.mix.push_back(matrix_from_json(j.at("mix").at(i)));
    p.threshold_raw.push_back(matrix_from_json(j.at("threshold_raw").at(i)));
  }
  p.validate();
  return p;
}

inline nlohmann::json layer_spec_to_json(const LayerSpec& spec) {
  nlohmann::json j;
  j["c_in"] = spec.c_in;
  j["c_out"] = spec.c_out;
  j["n"] = spec.n;
  if (spec.kind == LayerSpec::Kind::ConvKxK) {
    j["kind"] = "conv";
    j["kernel"] = spec.kernel;
  } else {
    j["kind"] = "perceptron";
    j["paths"] = spec.paths;
  }
  return j;
}

inline LayerSpec layer_spec_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  LayerSpec spec;
  if (kind == "conv") {
    spec.kind = LayerSpec::Kind::ConvKxK;
    spec.kernel = j.at("kernel").get<int>();
  } else if (kind == "perceptron") {
    spec.kind = LayerSpec::Kind::HTPerceptron;
    spec.paths = j.at("paths").get<int>();
  } else {
    throw std::runtime_error("unknown layer kind '" + kind + "'");
  }
  spec.c_in = j.at("c_in").get<int>();
  spec.c_out = j.at("c_out").get<int>();
  spec.n = j.at("n").get<int>();
  spec.validate();
  return spec;
}

inline std::vector<LayerSpec> layer_specs_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::runtime_error("model description must be a JSON array");
  std::vector<LayerSpec> specs;
  for (const nlohmann::json& item : j) specs.push_back(layer_spec_from_json(item));
  return specs;
}

inline nlohmann::json cost_report_to_json(const CostReport& report) {
  nlohmann::json j;
  j["macs"] = report.macs;
  j["params"] = report.params;
  if (report.reduction_vs_baseline) {
    j["reduction_vs_baseline"] = *report.reduction_vs_baseline;
  }
  j["layers"] = nlohmann::json::array();
  for (const CostReport::Row& row : report.layers) {
    nlohmann::json entry = layer_spec_to_json(row.spec);
    entry["macs"] = row.macs;
    entry["params"] = row.params;
    j["layers"].push_back(std::move(entry));
  }
  return j;
}

}  // namespace haarkit
