#include <numeric>

#include "regstyle/datasets.hpp"
#include "regstyle/error.hpp"

namespace regstyle::datasets {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::Usage, "below(0)");
  // Reject the tail that would bias the modulo.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % n;
}

std::vector<std::size_t> SplitMix64::sample(std::size_t n, std::size_t k) {
  if (k > n) throw Error(ErrorCode::Usage, "cannot sample " + std::to_string(k) + " of " + std::to_string(n));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view salt) {
  // FNV-1a over the salt, folded into the seed and scrambled once.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : salt) {
    h ^= c;
    h *= 1099511628211ull;
  }
  SplitMix64 mix(seed ^ h);
  return mix.next();
}

std::string_view to_string(Task task) {
  switch (task) {
    case Task::Mud:
      return "mud";
    case Task::Gyafc:
      return "gyafc";
    case Task::Cochrane:
      return "cochrane";
  }
  return "?";
}

Task task_from_string(std::string_view name) {
  if (name == "mud") return Task::Mud;
  if (name == "gyafc") return Task::Gyafc;
  if (name == "cochrane") return Task::Cochrane;
  throw Error(ErrorCode::Usage, "unknown task '" + std::string(name) + "' (expected mud, gyafc or cochrane)");
}

std::string_view to_string(MudVariant v) {
  switch (v) {
    case MudVariant::Random:
      return "random";
    case MudVariant::Single:
      return "single";
    case MudVariant::Diverse:
      return "diverse";
  }
  return "?";
}

MudVariant mud_variant_from_string(std::string_view name) {
  if (name == "random") return MudVariant::Random;
  if (name == "single") return MudVariant::Single;
  if (name == "diverse") return MudVariant::Diverse;
  throw Error(ErrorCode::Usage, "unknown mud variant '" + std::string(name) + "' (expected random, single or diverse)");
}

}  // namespace regstyle::datasets
