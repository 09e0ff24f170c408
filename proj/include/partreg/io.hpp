#pragma once

#include "partreg/core.hpp"
#include "partreg/registration.hpp"

#include <filesystem>
#include <string>

namespace partreg {

/// Reads a PLY (ascii or binary little-endian; x,y,z and optional
/// nx,ny,nz as 32- or 64-bit floats) or an OBJ (vertex lines only).
/// Normals are renormalized; zero-norm normals are a ParseError.
PointCloud read_point_cloud(const std::filesystem::path& path);

enum class PlyFormat { Ascii, BinaryLittleEndian };

/// Writes a PLY with double precision properties. Binary payloads
/// round-trip bit-exactly through read_point_cloud.
void write_point_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                       PlyFormat format = PlyFormat::BinaryLittleEndian);

/// Pose document: rotation (row-major 3x3), translation, losses, the
/// per-candidate array, and the resolved run configuration; numbers carry
/// 17 significant digits. config_json is spliced in verbatim; extra_fields,
/// when nonempty, is raw `"key": value` JSON appended at the top level.
void write_pose(const RegistrationResult& result, const std::string& config_json,
                const std::filesystem::path& path, const std::string& extra_fields = "");

/// Reads rotation + translation back from a pose document.
RigidTransform read_pose(const std::filesystem::path& path);

}  // namespace partreg
