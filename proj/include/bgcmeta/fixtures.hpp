#pragma once

#include "bgcmeta/meta_learn.hpp"
#include "bgcmeta/siop_library.hpp"
#include "bgcmeta/synth.hpp"

#include <cstdint>
#include <vector>

namespace bgcmeta {

/// A demonstration spectral library drawn from three water types (clear
/// marine, coastal, turbid estuarine) with concentrations and specific IOPs
/// kept inside typical coastal ranges.
SpectralLibrary make_fixture_library(std::size_t count = 247, std::uint64_t seed = 7);

struct RegionSplit {
  std::vector<RegionSample> region;
  SyntheticDataset remainder;
};

/// Removes the `count` records nearest (in standardized SIOP-score space) to
/// a seeded anchor and returns them as a region; the rest stays for training.
RegionSplit carve_region(const SyntheticDataset& dataset, std::size_t count, std::uint64_t seed);

}  // namespace bgcmeta
