#pragma once

#include <string>

#include "ppcmt/types.hpp"

namespace ppcmt {

enum class CloudFormat { xyz, pcf };

// Picks PCF for a ".pcf" extension, XYZ otherwise.
CloudFormat format_for_path(const std::string& path);

// XYZ: one "x y z" per line, shortest round-trip decimals, LF endings.
// PCF: magic "PCF1", u32 little-endian count, then N x 3 f32 little-endian.
// Readers reject non-finite coordinates. read_cloud sniffs the PCF magic, so
// either format loads regardless of extension.
PointCloud read_cloud(const std::string& path);
void write_cloud(const std::string& path, const PointCloud& cloud, CloudFormat format);
void write_cloud(const std::string& path, const PointCloud& cloud);  // by extension

}  // namespace ppcmt
