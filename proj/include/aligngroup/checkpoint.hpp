#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "aligngroup/config.hpp"
#include "aligngroup/params.hpp"
#include "aligngroup/types.hpp"

namespace aligngroup {

// Binary checkpoint: versioned header, config text, every parameter tensor
// with its Adam state in row-major order, and the RNG state string.
struct Checkpoint {
  TrainConfig config;
  ParameterSet params;
  Index adam_steps = 0;
  std::string rng_state;
};

namespace detail {

constexpr char kCheckpointMagic[8] = {'A', 'G', 'C', 'K', 'P', 'T', '0', '1'};

inline void write_string(std::ostream& out, const std::string& s) {
  const std::uint64_t n = s.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(s.data(), static_cast<std::streamsize>(n));
}

inline std::string read_string(std::istream& in) {
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

inline void write_matrix(std::ostream& out, const Mat& m) {
  const std::int64_t rows = m.rows(), cols = m.cols();
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      const double x = m(r, c);
      out.write(reinterpret_cast<const char*>(&x), sizeof x);
    }
}

inline Mat read_matrix(std::istream& in) {
  std::int64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  require(in.good() && rows >= 0 && cols >= 0, "corrupt checkpoint tensor");
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      double x = 0.0;
      in.read(reinterpret_cast<char*>(&x), sizeof x);
      m(r, c) = x;
    }
  return m;
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write checkpoint " + path);
  out.write(detail::kCheckpointMagic, sizeof detail::kCheckpointMagic);
  detail::write_string(out, config_to_string(ck.config));
  const std::int64_t steps = ck.adam_steps;
  out.write(reinterpret_cast<const char*>(&steps), sizeof steps);
  for (const auto& slot : ck.params.slots) {
    detail::write_matrix(out, *slot.value);
    detail::write_matrix(out, slot.m);
    detail::write_matrix(out, slot.v);
  }
  detail::write_string(out, ck.rng_state);
  require(out.good(), "short write on checkpoint " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open checkpoint " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  require(in.good() && std::memcmp(magic, detail::kCheckpointMagic,
                                   sizeof magic) == 0,
          path + ": not a checkpoint file (bad magic)");
  Checkpoint ck;
  std::istringstream cfg_in(detail::read_string(in));
  ck.config = config_from_key_values(parse_key_values(cfg_in, path));
  std::int64_t steps = 0;
  in.read(reinterpret_cast<char*>(&steps), sizeof steps);
  ck.adam_steps = steps;
  for (auto& slot : ck.params.slots) {
    *slot.value = detail::read_matrix(in);
    slot.m = detail::read_matrix(in);
    slot.v = detail::read_matrix(in);
    slot.grad.setZero(slot.value->rows(), slot.value->cols());
  }
  ck.rng_state = detail::read_string(in);
  require(in.good(), path + ": truncated checkpoint");
  return ck;
}

}  // namespace aligngroup
