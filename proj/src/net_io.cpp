#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "formation/net.hpp"

namespace formation {

namespace {

using nlohmann::json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int line_of(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

const json& field(const json& obj, const std::string& key,
                  const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

std::string arch_string(const std::vector<int>& arch) {
  std::string s = "[";
  for (std::size_t i = 0; i < arch.size(); ++i) {
    s += (i ? "," : "") + std::to_string(arch[i]);
  }
  return s + "]";
}

}  // namespace

std::string serialize_weights(const WeightFile& file) {
  const auto& net = file.net;
  std::ostringstream out;
  out << "{\n  \"version\": 1,\n  \"arch\": " << arch_string(net.arch())
      << ",\n  \"activation\": \"relu\",\n  \"layers\": [\n";
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& w = layers[l].w;
    out << "    {\n      \"w\": [\n";
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      out << "        [";
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        out << (j ? ", " : "") << num(w(i, j));
      }
      out << "]" << (i + 1 < w.rows() ? "," : "") << "\n";
    }
    out << "      ],\n      \"b\": [";
    for (Eigen::Index i = 0; i < layers[l].b.size(); ++i) {
      out << (i ? ", " : "") << num(layers[l].b(i));
    }
    out << "]\n    }" << (l + 1 < layers.size() ? "," : "") << "\n";
  }
  out << "  ],\n  \"input_norm\": {\"d_max\": " << num(file.d_max)
      << "},\n  \"meta\": {\"model_kind\": \"" << file.meta.model_kind
      << "\", \"seed\": " << file.meta.seed
      << ", \"episodes\": " << file.meta.episodes << "}\n}\n";
  return out.str();
}

WeightFile parse_weights(const std::string& text,
                         const std::vector<int>& expected_arch) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("weights: line " + std::to_string(line_of(text, e.byte)) +
                     ": " + e.what());
  }
  const json& version = field(doc, "version", "weights");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    throw VersionError("weights: unsupported version " + version.dump());
  }
  const json& arch_j = field(doc, "arch", "weights");
  if (!arch_j.is_array()) throw ParseError("weights.arch: expected an array");
  std::vector<int> arch;
  for (const auto& n : arch_j) {
    if (!n.is_number_integer()) {
      throw ParseError("weights.arch: expected integers");
    }
    arch.push_back(n.get<int>());
  }
  if (!expected_arch.empty() && arch != expected_arch) {
    throw VersionError("weights: architecture " + arch_string(arch) +
                       " does not match expected " +
                       arch_string(expected_arch));
  }
  const json& act = field(doc, "activation", "weights");
  if (act != "relu") throw ParseError("weights.activation: expected \"relu\"");

  WeightFile file{Network<double>(arch), 0.0, {}};
  const json& layers_j = field(doc, "layers", "weights");
  auto& layers = file.net.layers();
  if (!layers_j.is_array() || layers_j.size() != layers.size()) {
    throw ParseError("weights.layers: expected " +
                     std::to_string(layers.size()) + " layers");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string where = "weights.layers[" + std::to_string(l) + "]";
    const json& w = field(layers_j[l], "w", where);
    auto& W = layers[l].w;
    if (!w.is_array() || static_cast<Eigen::Index>(w.size()) != W.rows()) {
      throw ParseError(where + ".w: expected " + std::to_string(W.rows()) +
                       " rows");
    }
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      const json& row = w[static_cast<std::size_t>(i)];
      const std::string rw = where + ".w[" + std::to_string(i) + "]";
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != W.cols()) {
        throw ParseError(rw + ": expected " + std::to_string(W.cols()) +
                         " columns");
      }
      for (Eigen::Index j = 0; j < W.cols(); ++j) {
        W(i, j) = number(row[static_cast<std::size_t>(j)],
                         rw + "[" + std::to_string(j) + "]");
      }
    }
    const json& b = field(layers_j[l], "b", where);
    auto& B = layers[l].b;
    if (!b.is_array() || static_cast<Eigen::Index>(b.size()) != B.size()) {
      throw ParseError(where + ".b: expected " + std::to_string(B.size()) +
                       " entries");
    }
    for (Eigen::Index i = 0; i < B.size(); ++i) {
      B(i) = number(b[static_cast<std::size_t>(i)],
                    where + ".b[" + std::to_string(i) + "]");
    }
  }
  if (!file.net.all_finite()) throw ParseError("weights: non-finite parameter");

  const json& norm = field(doc, "input_norm", "weights");
  file.d_max = number(field(norm, "d_max", "weights.input_norm"),
                      "weights.input_norm.d_max");
  if (!(file.d_max > 0.0)) {
    throw ParseError("weights.input_norm.d_max: must be positive");
  }
  const json& meta = field(doc, "meta", "weights");
  const json& kind = field(meta, "model_kind", "weights.meta");
  if (!kind.is_string() || (kind != "reach" && kind != "keep")) {
    throw ParseError("weights.meta.model_kind: expected \"reach\" or \"keep\"");
  }
  file.meta.model_kind = kind.get<std::string>();
  const json& seed = field(meta, "seed", "weights.meta");
  const json& episodes = field(meta, "episodes", "weights.meta");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    throw ParseError("weights.meta.seed: expected an integer");
  }
  if (!episodes.is_number_integer()) {
    throw ParseError("weights.meta.episodes: expected an integer");
  }
  file.meta.seed = seed.get<std::uint64_t>();
  file.meta.episodes = episodes.get<std::int64_t>();
  return file;
}

void save_weights(const WeightFile& file, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << serialize_weights(file);
  if (!out) throw IoError("write failed for '" + path + "'");
}

WeightFile load_weights(const std::string& path,
                        const std::vector<int>& expected_arch) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_weights(buf.str(), expected_arch);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace formation
