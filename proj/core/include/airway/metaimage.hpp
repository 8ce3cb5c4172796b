#pragma once

#include <filesystem>

#include "airway/volume.hpp"

namespace airway {

/// Reads a 3-D MetaImage. Payload is either inline after the header
/// (`ElementDataFile = LOCAL`, typically `.mha`) or a sibling raw file
/// resolved relative to the header's directory.
Volume3 read_mha(const std::filesystem::path& path);

/// Writes a little-endian MetaImage. A `.mhd` path gets a sibling `.raw`
/// payload; any other extension is written inline. Spacing and origin are
/// printed in shortest round-trip form so a read reproduces them exactly.
void write_mha(const Volume3& vol, const std::filesystem::path& path);

}  // namespace airway
