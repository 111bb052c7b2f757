#include "qcs/envelope.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace qcs {

namespace {

Envelope make_table(const std::string& name, double (*f)(double, double), double p) {
  Envelope env;
  env.name = name;
  env.points.resize(kEnvelopeTablePoints);
  for (int i = 0; i < kEnvelopeTablePoints; ++i) {
    const double x = static_cast<double>(i) / (kEnvelopeTablePoints - 1);
    env.points[i] = f(x, p);
  }
  return env;
}

}  // namespace

Envelope make_gaussian(const std::string& name, double sigma_fraction) {
  return make_table(name,
                    [](double x, double s) {
                      const double d = (x - 0.5) / s;
                      return std::exp(-0.5 * d * d);
                    },
                    sigma_fraction);
}

Envelope make_triangle(const std::string& name) {
  return make_table(name, [](double x, double) { return 1.0 - std::abs(2.0 * x - 1.0); }, 0.0);
}

Envelope make_flattop(const std::string& name, double edge_fraction) {
  return make_table(name,
                    [](double x, double e) {
                      if (x < e) return 0.5 - 0.5 * std::cos(M_PI * x / e);
                      if (x > 1.0 - e) return 0.5 - 0.5 * std::cos(M_PI * (1.0 - x) / e);
                      return 1.0;
                    },
                    edge_fraction);
}

void EnvelopeLibrary::set(int id, Envelope envelope) {
  if (id == 0) throw ConfigError("envelope id 0 is reserved for the rectangular shape");
  if (id < 0 || id > 255) throw ConfigError("envelope id " + std::to_string(id) + " out of range 1..255");
  if (envelope.points.size() != kEnvelopeTablePoints) {
    throw ConfigError("envelope table must have " +
                      std::to_string(kEnvelopeTablePoints) + " points, got " +
                      std::to_string(envelope.points.size()));
  }
  envelopes_[id] = std::move(envelope);
}

bool EnvelopeLibrary::contains(int id) const {
  return id == 0 || envelopes_.count(id) != 0;
}

const Envelope& EnvelopeLibrary::at(int id) const {
  auto it = envelopes_.find(id);
  if (it == envelopes_.end()) throw UnknownEnvelope(id);
  return it->second;
}

std::vector<int> EnvelopeLibrary::ids() const {
  std::vector<int> out;
  for (const auto& [id, env] : envelopes_) out.push_back(id);
  return out;
}

double EnvelopeLibrary::value(int id, uint64_t k, uint64_t n_samples) const {
  if (id == 0) return 1.0;
  const Envelope& env = at(id);
  if (n_samples <= 1 || k == 0) return env.points.front();
  if (k >= n_samples - 1) return env.points.back();
  const double u = static_cast<double>(k) *
                   static_cast<double>(kEnvelopeTablePoints - 1) /
                   static_cast<double>(n_samples - 1);
  const int i = static_cast<int>(u);
  const double frac = u - i;
  if (i >= kEnvelopeTablePoints - 1) return env.points.back();
  return env.points[i] * (1.0 - frac) + env.points[i + 1] * frac;
}

void EnvelopeLibrary::save(const std::string& index_path) const {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(index_path).parent_path();
  nlohmann::json index;
  index["version"] = 1;
  index["envelopes"] = nlohmann::json::array();
  for (const auto& [id, env] : envelopes_) {
    char filename[32];
    std::snprintf(filename, sizeof(filename), "env_%03d.f64", id);
    index["envelopes"].push_back({{"id", id}, {"name", env.name}, {"file", filename}});
    std::ofstream out(dir / filename, std::ios::binary);
    if (!out) throw IoError("cannot write envelope table " + std::string(filename));
    out.write(reinterpret_cast<const char*>(env.points.data()),
              static_cast<std::streamsize>(env.points.size() * sizeof(double)));
  }
  std::ofstream out(index_path);
  if (!out) throw IoError("cannot write envelope index " + index_path);
  out << index.dump(2) << "\n";
}

EnvelopeLibrary EnvelopeLibrary::load(const std::string& index_path) {
  namespace fs = std::filesystem;
  std::ifstream in(index_path);
  if (!in) throw IoError("cannot open envelope index " + index_path);
  nlohmann::json index;
  try {
    in >> index;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad envelope index " + index_path + ": " + e.what());
  }
  EnvelopeLibrary lib;
  const fs::path dir = fs::path(index_path).parent_path();
  for (const auto& entry : index.at("envelopes")) {
    Envelope env;
    env.name = entry.value("name", "");
    const int id = entry.at("id").get<int>();
    const fs::path file = dir / entry.at("file").get<std::string>();
    std::ifstream table(file, std::ios::binary);
    if (!table) throw IoError("cannot open envelope table " + file.string());
    env.points.resize(kEnvelopeTablePoints);
    table.read(reinterpret_cast<char*>(env.points.data()),
               static_cast<std::streamsize>(env.points.size() * sizeof(double)));
    if (!table || table.gcount() != static_cast<std::streamsize>(
                                        env.points.size() * sizeof(double))) {
      throw IoError("envelope table " + file.string() + " truncated");
    }
    lib.set(id, std::move(env));
  }
  return lib;
}

}  // namespace qcs
