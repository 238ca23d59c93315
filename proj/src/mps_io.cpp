#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "polariton/error.hpp"
#include "polariton/io.hpp"
#include "polariton/mps.hpp"

namespace polariton::mps {
namespace {

constexpr char kMagic[8] = {'P', 'O', 'L', 'M', 'P', 'S', '0', '1'};

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::string params_hash(const ModelParams& params) {
  std::ostringstream canon;
  canon << "omega_x=" << format_double(params.omega_x) << ";J=" << format_double(params.J)
        << ";Omega=" << format_double(params.Omega) << ";U=" << format_double(params.U)
        << ";L=" << params.L << ";N=" << params.N << ";boundary=" << to_string(params.boundary)
        << ";cap_photon=" << params.resolved_cap_photon()
        << ";cap_exciton=" << params.resolved_cap_exciton()
        << ";hard_core=" << (params.hard_core() ? 1 : 0);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canon.str())));
  return buf;
}

void write_checkpoint(const std::filesystem::path& path, const MPSState& state,
                      const ModelParams& params) {
  nlohmann::json header;
  header["L"] = state.length();
  header["N"] = params.N;
  header["target_charge"] = state.target_charge();
  header["cap_photon"] = state.local().cap_photon;
  header["cap_exciton"] = state.local().cap_exciton;
  header["local_charges"] = state.local_charges();
  header["center"] = state.center();
  header["chi"] = state.bond_dims();
  header["params_hash"] = params_hash(params);
  nlohmann::json bonds = nlohmann::json::array();
  for (int b = 0; b <= state.length(); ++b) {
    nlohmann::json sectors = nlohmann::json::array();
    for (auto [q, d] : state.bond(b)) sectors.push_back({q, d});
    bonds.push_back(sectors);
  }
  header["bonds"] = bonds;
  nlohmann::json blocks = nlohmann::json::array();
  for (int j = 0; j < state.length(); ++j) {
    for (int s = 0; s < state.local().dim(); ++s) {
      for (const auto& [q, m] : state.tensor(j, s)) {
        blocks.push_back({j, s, q, m.rows(), m.cols()});
      }
    }
  }
  header["blocks"] = blocks;
  const std::string text = header.dump();

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(kMagic, sizeof kMagic);
    const std::uint64_t length = text.size();
    out.write(reinterpret_cast<const char*>(&length), sizeof length);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (int j = 0; j < state.length(); ++j) {
      for (int s = 0; s < state.local().dim(); ++s) {
        for (const auto& [q, m] : state.tensor(j, s)) {
          out.write(reinterpret_cast<const char*>(m.data()),
                    static_cast<std::streamsize>(m.size() * sizeof(double)));
        }
      }
    }
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw Error(path.string() + " is not an MPS checkpoint");
  }
  std::uint64_t length = 0;
  in.read(reinterpret_cast<char*>(&length), sizeof length);
  if (!in || length > (1ull << 32)) throw Error("corrupt checkpoint header");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw Error("truncated checkpoint header");
  const nlohmann::json header = nlohmann::json::parse(text);

  LocalSpace local;
  local.cap_photon = header.at("cap_photon").get<int>();
  local.cap_exciton = header.at("cap_exciton").get<int>();
  MPSState state(header.at("L").get<int>(), local, header.at("target_charge").get<int>(),
                 header.at("local_charges").get<std::vector<int>>());
  const auto& bonds = header.at("bonds");
  for (int b = 0; b <= state.length(); ++b) {
    for (const auto& sector : bonds.at(b)) state.bond(b)[sector.at(0).get<int>()] = sector.at(1).get<int>();
  }
  for (const auto& blk : header.at("blocks")) {
    const int j = blk.at(0).get<int>();
    const int s = blk.at(1).get<int>();
    const int q = blk.at(2).get<int>();
    Matrix m(blk.at(3).get<Eigen::Index>(), blk.at(4).get<Eigen::Index>());
    if (j < 0 || j >= state.length() || s < 0 || s >= local.dim()) throw Error("corrupt block index");
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw Error("truncated checkpoint payload");
    state.tensor(j, s)[q] = std::move(m);
  }
  state.set_center(header.at("center").get<int>());
  return {std::move(state), header.at("params_hash").get<std::string>()};
}

}  // namespace polariton::mps
