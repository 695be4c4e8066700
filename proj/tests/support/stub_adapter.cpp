// Bag-of-words stand-in for an external model, speaking the adapter protocol
// on stdin/stdout. Used only by tests.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

using nlohmann::json;

namespace {

std::set<std::string> words(const std::string& text) {
  std::set<std::string> out;
  std::istringstream in(text);
  for (std::string w; in >> w;) {
    for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.insert(w);
  }
  return out;
}

struct Model {
  std::map<std::string, double> weight;
  double bias = 0.0;

  double score(const std::string& text) const {
    double z = bias;
    for (const auto& w : words(text)) {
      if (auto it = weight.find(w); it != weight.end()) z += it->second;
    }
    return 1.0 / (1.0 + std::exp(-z));
  }
};

Model fit(const json& instances) {
  std::map<std::string, double> pos, neg;
  double npos = 0, nneg = 0;
  for (const auto& inst : instances) {
    const bool label = inst.at("label").get<bool>();
    (label ? npos : nneg) += 1;
    for (const auto& w : words(inst.at("fused_text").get<std::string>())) (label ? pos : neg)[w] += 1;
  }
  Model m;
  m.bias = std::log((npos + 1) / (nneg + 1));
  std::set<std::string> vocab;
  for (const auto& [w, c] : pos) vocab.insert(w);
  for (const auto& [w, c] : neg) vocab.insert(w);
  for (const auto& w : vocab) {
    m.weight[w] = std::log((pos[w] + 1) / (npos + 2)) - std::log((neg[w] + 1) / (nneg + 2));
  }
  return m;
}

json handle(const json& req) {
  const auto op = req.at("op").get<std::string>();
  const std::filesystem::path dir = req.value("model_dir", "");
  if (op == "train") {
    const auto model = fit(req.at("instances"));
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "stub_model.json") << json{{"weight", model.weight}, {"bias", model.bias}}.dump();
    json validation = nullptr;
    if (req.contains("validation") && !req["validation"].empty()) {
      std::size_t correct = 0;
      for (const auto& inst : req["validation"]) {
        correct += (model.score(inst.at("fused_text")) >= 0.5) == inst.at("label").get<bool>();
      }
      validation = static_cast<double>(correct) / static_cast<double>(req["validation"].size());
    }
    return {{"op", "train"}, {"summary", {{"best_epoch", 1}, {"validation_metric", validation}}}};
  }
  if (op == "predict") {
    std::ifstream in(dir / "stub_model.json");
    if (dir.empty() || !in) return {{"op", "predict"}, {"error", "model not found"}};
    const auto saved = json::parse(in);
    Model model{saved.at("weight").get<std::map<std::string, double>>(), saved.at("bias").get<double>()};
    json preds = json::array();
    for (const auto& inst : req.at("instances")) {
      const double s = model.score(inst.at("fused_text"));
      preds.push_back({{"id", inst.at("id")}, {"label", s >= 0.5}, {"score", s}});
    }
    return {{"op", "predict"}, {"predictions", preds}};
  }
  return {{"op", op}, {"error", "unknown op " + op}};
}

}  // namespace

int main() {
  for (std::string line; std::getline(std::cin, line);) {
    json response;
    try {
      const auto req = json::parse(line);
      if (req.value("op", "") == "shutdown") return 0;
      response = handle(req);
    } catch (const std::exception& e) {
      response = {{"error", std::string("malformed request: ") + e.what()}};
    }
    std::cout << response.dump() << std::endl;
  }
  return 0;
}
