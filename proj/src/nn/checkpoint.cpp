#include "alam/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace alam::nn {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

void save_checkpoint(const std::string& path, const std::vector<CheckpointEntry>& nets,
                     const json& extra) {
  json header;
  header["format"] = "alam-ckpt-v1";
  header["extra"] = extra;
  json arr = json::array();
  std::uint64_t offset = 0;
  for (const auto& e : nets) {
    const MlpConfig& c = e.net->config();
    json j;
    j["name"] = e.name;
    j["input_dim"] = c.input_dim;
    j["output_dim"] = c.output_dim;
    j["hidden"] = c.hidden;
    j["output_map"] = output_map_name(c.output_map);
    j["offset"] = offset;
    j["count"] = e.net->param_count();
    offset += static_cast<std::uint64_t>(e.net->param_count());
    arr.push_back(std::move(j));
  }
  header["nets"] = std::move(arr);

  const std::string hs = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot open for write: " + path);
  const std::uint64_t hlen = hs.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& e : nets) {
    const Vec flat = e.net->to_flat();
    out.write(reinterpret_cast<const char*>(flat.data()),
              static_cast<std::streamsize>(flat.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open: " + path);
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw std::runtime_error("checkpoint: truncated header: " + path);

  LoadedCheckpoint ck;
  ck.header = json::parse(hs);
  if (ck.header.value("format", "") != "alam-ckpt-v1")
    throw std::runtime_error("checkpoint: unrecognized format in " + path);
  for (const auto& j : ck.header.at("nets")) {
    const auto count = j.at("count").get<std::int64_t>();
    Vec flat(count);
    in.read(reinterpret_cast<char*>(flat.data()),
            static_cast<std::streamsize>(count * static_cast<std::int64_t>(sizeof(double))));
    if (!in) throw std::runtime_error("checkpoint: truncated parameters: " + path);
    ck.flat.emplace(j.at("name").get<std::string>(), std::move(flat));
  }
  return ck;
}

MlpConfig LoadedCheckpoint::config_of(const std::string& name) const {
  for (const auto& j : header.at("nets")) {
    if (j.at("name").get<std::string>() != name) continue;
    MlpConfig c;
    c.input_dim = j.at("input_dim").get<int>();
    c.output_dim = j.at("output_dim").get<int>();
    c.hidden = j.at("hidden").get<std::vector<int>>();
    c.output_map = output_map_from_name(j.at("output_map").get<std::string>());
    return c;
  }
  throw std::invalid_argument("checkpoint: no net named '" + name + "'");
}

void LoadedCheckpoint::restore(const std::string& name, Mlp& net) const {
  auto it = flat.find(name);
  if (it == flat.end()) throw std::invalid_argument("checkpoint: no net named '" + name + "'");
  net.from_flat(it->second);
}

}  // namespace alam::nn
