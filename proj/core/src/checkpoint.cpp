#include "graphsmile/checkpoint.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "graphsmile/error.hpp"
#include "json.hpp"

namespace graphsmile {

using nlohmann::json;

std::string checkpoint_to_string(const std::vector<const Param*>& params) {
  json doc;
  doc["format"] = "graphsmile-checkpoint";
  doc["version"] = kCheckpointVersion;
  json arr = json::array();
  for (const Param* p : params) {
    arr.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}, {"values", p->value.data()}});
  }
  doc["params"] = std::move(arr);
  return doc.dump() + "\n";
}

void checkpoint_from_string(const std::string& text, const std::vector<Param*>& params) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(1, std::string("checkpoint: ") + e.what());
  }
  if (doc.value("format", "") != "graphsmile-checkpoint") throw SchemaError("checkpoint: unrecognised format");
  if (doc.value("version", 0) != kCheckpointVersion) {
    throw SchemaError("checkpoint: unsupported version " + doc.value("version", json()).dump());
  }
  std::map<std::string, const json*> by_name;
  for (const json& e : doc.at("params")) by_name[e.at("name").get<std::string>()] = &e;
  if (by_name.size() != params.size()) {
    throw SchemaError("checkpoint: holds " + std::to_string(by_name.size()) + " params, model expects " +
                      std::to_string(params.size()));
  }
  for (Param* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw SchemaError("checkpoint: missing param " + p->name);
    const json& e = *it->second;
    const auto rows = e.at("rows").get<std::size_t>();
    const auto cols = e.at("cols").get<std::size_t>();
    if (rows != p->value.rows() || cols != p->value.cols()) {
      throw SchemaError("checkpoint: shape mismatch for " + p->name);
    }
    p->value = Matrix(rows, cols, e.at("values").get<std::vector<double>>());
    p->zero_grad();
  }
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<const Param*>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << checkpoint_to_string(params);
}

void load_checkpoint(const std::filesystem::path& path, const std::vector<Param*>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  checkpoint_from_string(ss.str(), params);
}

}  // namespace graphsmile
