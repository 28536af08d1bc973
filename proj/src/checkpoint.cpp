// SPDX-License-Identifier: Apache-2.0
#include "npd/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "npd/errors.hpp"

namespace npd {
namespace {

constexpr std::array<char, 8> kMagic{'N', 'P', 'D', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void put_u64(std::ofstream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
void put_f64(std::ofstream& out, double v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

class Reader {
 public:
  explicit Reader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}
  void read(void* dst, std::size_t len) {
    if (pos_ + len > bytes_.size()) throw Error(ErrorKind::CheckpointError, "checkpoint is truncated");
    std::memcpy(dst, bytes_.data() + pos_, len);
    pos_ += len;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    read(&v, sizeof v);
    return v;
  }
  double f64() {
    double v = 0.0;
    read(&v, sizeof v);
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void checkpoint_save(const std::filesystem::path& path, const NpdState& state, const SpeciesParams& params,
                     const BodyCharge& body) {
  if (state.species() != params.count()) throw Error(ErrorKind::InvalidArgument, "species count mismatch");
  if (!(body.rho_tilde.grid() == state.grid())) throw Error(ErrorKind::InvalidArgument, "body grid mismatch");
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::CheckpointError, "cannot open " + tmp.string() + " for writing");
    out.write(kMagic.data(), kMagic.size());
    put_u64(out, static_cast<std::uint64_t>(state.grid().dim()));
    put_u64(out, static_cast<std::uint64_t>(state.grid().n()));
    put_u64(out, static_cast<std::uint64_t>(state.species()));
    put_f64(out, state.time());
    put_f64(out, params.diffusivity);
    for (double z : params.valences) put_f64(out, z);
    const auto bytes = static_cast<std::streamsize>(state.grid().points() * sizeof(double));
    for (const auto& c : state.concentrations()) out.write(reinterpret_cast<const char*>(c.data()), bytes);
    out.write(reinterpret_cast<const char*>(body.rho_tilde.data()), bytes);
    if (!out) throw Error(ErrorKind::CheckpointError, "write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint checkpoint_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::CheckpointError, "cannot open " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));

  std::array<char, 8> magic{};
  r.read(magic.data(), magic.size());
  if (magic != kMagic) throw Error(ErrorKind::CheckpointError, path.string() + " is not an NPDCKPT1 checkpoint");
  const std::uint64_t dim = r.u64();
  const std::uint64_t n = r.u64();
  const std::uint64_t species = r.u64();
  if ((dim != 2 && dim != 3) || n < 8 || n > (1u << 12) || (n & (n - 1)) != 0 || species == 0 || species > 64) {
    throw Error(ErrorKind::CheckpointError, "checkpoint header describes an unsupported grid");
  }
  const double time = r.f64();
  const double D = r.f64();
  std::vector<double> z(species);
  for (auto& zi : z) zi = r.f64();

  const SpectralGrid grid = SpectralGrid::make(static_cast<int>(dim), static_cast<int>(n));
  const std::size_t bytes = grid.points() * sizeof(double);
  if (r.remaining() != (species + 1) * bytes) {
    throw Error(ErrorKind::CheckpointError, "checkpoint payload has " + std::to_string(r.remaining()) +
                                                " bytes, expected " + std::to_string((species + 1) * bytes));
  }
  SpeciesFields c;
  for (std::uint64_t i = 0; i < species; ++i) {
    RealField f(grid);
    r.read(f.data(), bytes);
    c.push_back(std::move(f));
  }
  RealField body(grid);
  r.read(body.data(), bytes);
  return Checkpoint{NpdState(time, std::move(c)), SpeciesParams::make(D, std::move(z)), BodyCharge(std::move(body))};
}

}  // namespace npd
