// Copyright 2026 The inpaintbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IPB_NIFTI_HPP
#define IPB_NIFTI_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "ipb/types.hpp"

namespace ipb {

/// Reads a NIfTI-1 volume (.nii or .nii.gz; also .hdr/.img pairs).
///
/// scl_slope/scl_inter scaling is applied (slope 0 is treated as 1).
/// Supported datatypes: uint8, int16, uint16, int32, float32, float64 —
/// all widened to double. The affine comes from the sform when
/// sform_code > 0, else the qform, else diag(spacing). Little-endian is
/// assumed unless dim[0] falls outside [1,7], the standard byte-swap probe.
Volume read_volume(const std::filesystem::path& path);

/// Writes a NIfTI-1 single-file volume, float32 payload, sform from
/// v.affine. Gzip-compressed when compress is set. Deterministic: the gzip
/// stream carries a zero mtime, so identical volumes give identical bytes.
void write_volume(const Volume& v, const std::filesystem::path& path, bool compress);

/// Reads a volume and thresholds it: a voxel is set iff the stored intensity
/// is nonzero. Multi-label annotation files collapse to one area of interest.
BinaryMask read_mask(const std::filesystem::path& path);

/// Writes a mask as a uint8 NIfTI-1 volume; spacing and affine are copied
/// from `geometry`, which must have matching dims.
void write_mask(const BinaryMask& mask, const Volume& geometry,
                const std::filesystem::path& path, bool compress);

// Case directory layout:
//   <dir>/<case_id>/<case_id>-t1n.nii.gz           T1 image (required)
//   <dir>/<case_id>/<case_id>-mask-unhealthy.nii.gz tumor mask (required)
//   <dir>/<case_id>/<case_id>-mask-healthy.nii.gz   healthy mask (optional)
//   <dir>/<case_id>/<case_id>-t1n-voided.nii.gz     voided T1 (optional)
// Plain .nii files are accepted wherever .nii.gz is listed.

/// Loads one case, cross-validating dims. Optional members stay absent when
/// their files are absent. Throws MissingFile or DimsMismatch.
CaseRecord load_case(const std::filesystem::path& dataset_dir, const std::string& case_id);

/// Case ids found under dataset_dir (subdirectories holding a t1 file), sorted.
std::vector<std::string> list_cases(const std::filesystem::path& dataset_dir);

/// Resolves <case_dir>/<stem>.nii.gz or .nii; empty path when neither exists.
std::filesystem::path find_case_file(const std::filesystem::path& case_dir, const std::string& stem);

}  // namespace ipb

#endif  // IPB_NIFTI_HPP
