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

#include "ipb/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace ipb {
namespace {

// NIfTI-1 header, 348 bytes, natural alignment matches the on-disk layout.
struct Nifti1Header {
    std::int32_t sizeof_hdr;
    char data_type[10];
    char db_name[18];
    std::int32_t extents;
    std::int16_t session_error;
    char regular;
    char dim_info;
    std::int16_t dim[8];
    float intent_p1;
    float intent_p2;
    float intent_p3;
    std::int16_t intent_code;
    std::int16_t datatype;
    std::int16_t bitpix;
    std::int16_t slice_start;
    float pixdim[8];
    float vox_offset;
    float scl_slope;
    float scl_inter;
    std::int16_t slice_end;
    char slice_code;
    char xyzt_units;
    float cal_max;
    float cal_min;
    float slice_duration;
    float toffset;
    std::int32_t glmax;
    std::int32_t glmin;
    char descrip[80];
    char aux_file[24];
    std::int16_t qform_code;
    std::int16_t sform_code;
    float quatern_b;
    float quatern_c;
    float quatern_d;
    float qoffset_x;
    float qoffset_y;
    float qoffset_z;
    float srow_x[4];
    float srow_y[4];
    float srow_z[4];
    char intent_name[16];
    char magic[4];
};
static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must be 348 bytes");

enum NiftiDatatype : std::int16_t {
    kDtUint8 = 2,
    kDtInt16 = 4,
    kDtInt32 = 8,
    kDtFloat32 = 16,
    kDtFloat64 = 64,
    kDtUint16 = 512,
};

void swap_bytes(void* p, std::size_t size) {
    auto* b = static_cast<std::uint8_t*>(p);
    std::reverse(b, b + size);
}

template <class T>
void swap_field(T& v) {
    swap_bytes(&v, sizeof(T));
}

void swap_header(Nifti1Header& h) {
    swap_field(h.sizeof_hdr);
    swap_field(h.extents);
    swap_field(h.session_error);
    for (auto& d : h.dim) swap_field(d);
    swap_field(h.intent_p1);
    swap_field(h.intent_p2);
    swap_field(h.intent_p3);
    swap_field(h.intent_code);
    swap_field(h.datatype);
    swap_field(h.bitpix);
    swap_field(h.slice_start);
    for (auto& p : h.pixdim) swap_field(p);
    swap_field(h.vox_offset);
    swap_field(h.scl_slope);
    swap_field(h.scl_inter);
    swap_field(h.slice_end);
    swap_field(h.cal_max);
    swap_field(h.cal_min);
    swap_field(h.slice_duration);
    swap_field(h.toffset);
    swap_field(h.glmax);
    swap_field(h.glmin);
    swap_field(h.qform_code);
    swap_field(h.sform_code);
    swap_field(h.quatern_b);
    swap_field(h.quatern_c);
    swap_field(h.quatern_d);
    swap_field(h.qoffset_x);
    swap_field(h.qoffset_y);
    swap_field(h.qoffset_z);
    for (auto& v : h.srow_x) swap_field(v);
    for (auto& v : h.srow_y) swap_field(v);
    for (auto& v : h.srow_z) swap_field(v);
}

// gzread handles both gzip streams and plain files transparently.
class GzReader {
public:
    explicit GzReader(const std::filesystem::path& path) {
        file_ = gzopen(path.c_str(), "rb");
        if (file_ != nullptr) gzbuffer(file_, 1 << 18);
    }
    ~GzReader() {
        if (file_ != nullptr) gzclose(file_);
    }
    GzReader(const GzReader&) = delete;
    GzReader& operator=(const GzReader&) = delete;

    bool ok() const { return file_ != nullptr; }

    std::size_t read(void* dst, std::size_t n) {
        auto* out = static_cast<char*>(dst);
        std::size_t total = 0;
        while (total < n) {
            const unsigned chunk = static_cast<unsigned>(
                std::min<std::size_t>(n - total, 1u << 30));
            const int got = gzread(file_, out + total, chunk);
            if (got <= 0) break;
            total += static_cast<std::size_t>(got);
        }
        return total;
    }

    void skip(std::int64_t n) {
        char buf[4096];
        while (n > 0) {
            const std::size_t got = read(buf, std::min<std::int64_t>(n, sizeof(buf)));
            if (got == 0) throw TruncatedData("unexpected end of file while skipping header extensions");
            n -= static_cast<std::int64_t>(got);
        }
    }

private:
    gzFile file_ = nullptr;
};

int element_size(std::int16_t datatype) {
    switch (datatype) {
        case kDtUint8: return 1;
        case kDtInt16: return 2;
        case kDtUint16: return 2;
        case kDtInt32: return 4;
        case kDtFloat32: return 4;
        case kDtFloat64: return 8;
        default:
            throw UnsupportedDatatype("unsupported NIfTI datatype code " + std::to_string(datatype));
    }
}

template <class T>
void decode(const std::vector<char>& raw, bool swapped, std::vector<double>& out) {
    const std::size_t n = out.size();
    const char* src = raw.data();
    for (std::size_t i = 0; i < n; ++i) {
        T v;
        std::memcpy(&v, src + i * sizeof(T), sizeof(T));
        if (swapped && sizeof(T) > 1) swap_bytes(&v, sizeof(T));
        out[i] = static_cast<double>(v);
    }
}

Affine4 affine_from_qform(const Nifti1Header& h, const std::array<double, 3>& spacing) {
    // Quaternion per the NIfTI-1 reference: a is reconstructed from b,c,d.
    const double b = h.quatern_b, c = h.quatern_c, d = h.quatern_d;
    const double a2 = std::max(0.0, 1.0 - (b * b + c * c + d * d));
    const double a = std::sqrt(a2);
    const double qfac = h.pixdim[0] < 0.0f ? -1.0 : 1.0;

    Affine4 m = identity_affine();
    const double r[3][3] = {
        {a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)},
        {2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b)},
        {2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - b * b - c * c},
    };
    for (int i = 0; i < 3; ++i) {
        m[i][0] = r[i][0] * spacing[0];
        m[i][1] = r[i][1] * spacing[1];
        m[i][2] = r[i][2] * spacing[2] * qfac;
    }
    m[0][3] = h.qoffset_x;
    m[1][3] = h.qoffset_y;
    m[2][3] = h.qoffset_z;
    return m;
}

// Sibling data file for a two-file (.hdr/.img) pair.
std::filesystem::path img_companion(const std::filesystem::path& hdr_path) {
    std::filesystem::path base = hdr_path;
    bool gz = false;
    if (base.extension() == ".gz") {
        base.replace_extension();
        gz = true;
    }
    base.replace_extension(".img");
    if (std::filesystem::exists(base)) return base;
    const std::filesystem::path gz_img{base.string() + ".gz"};
    if (std::filesystem::exists(gz_img)) return gz_img;
    if (gz) return gz_img;  // report the name that was expected
    return base;
}

}  // namespace

Volume read_volume(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw MissingFile("no such file: " + path.string());
    GzReader in(path);
    if (!in.ok()) throw IoFailure("cannot open " + path.string());

    Nifti1Header h;
    if (in.read(&h, sizeof(h)) != sizeof(h)) {
        throw BadMagic(path.string() + ": too small for a NIfTI-1 header");
    }

    // Endianness probe: dim[0] must be in [1,7] for the native interpretation.
    bool swapped = false;
    if (h.dim[0] < 1 || h.dim[0] > 7) {
        swap_header(h);
        swapped = true;
        if (h.dim[0] < 1 || h.dim[0] > 7) {
            throw BadMagic(path.string() + ": dim[0] invalid under both byte orders");
        }
    }
    const bool single_file = std::memcmp(h.magic, "n+1", 4) == 0;
    const bool pair_file = std::memcmp(h.magic, "ni1", 4) == 0;
    if (!(single_file || pair_file) || h.sizeof_hdr != 348) {
        throw BadMagic(path.string() + ": not a NIfTI-1 file");
    }

    Volume v;
    for (int i = 0; i < 3; ++i) {
        const int n = i < h.dim[0] ? h.dim[i + 1] : 1;
        if (n < 1) throw BadMagic(path.string() + ": nonpositive dim");
        v.dims[i] = n;
    }
    for (int i = 4; i <= h.dim[0]; ++i) {
        if (h.dim[i] > 1) throw Error(path.string() + ": only 3-D volumes are supported");
    }
    for (int i = 0; i < 3; ++i) {
        const float p = h.pixdim[i + 1];
        v.spacing[i] = (std::isfinite(p) && p > 0.0f) ? static_cast<double>(p) : 1.0;
    }

    const int esize = element_size(h.datatype);
    const std::int64_t n = v.size();
    std::vector<char> raw(static_cast<std::size_t>(n) * esize);

    if (single_file) {
        const auto offset = static_cast<std::int64_t>(std::llround(h.vox_offset));
        if (offset < 348) throw BadMagic(path.string() + ": vox_offset below header size");
        in.skip(offset - 348);
        if (in.read(raw.data(), raw.size()) != raw.size()) {
            throw TruncatedData(path.string() + ": voxel data shorter than header implies");
        }
    } else {
        const std::filesystem::path img = img_companion(path);
        GzReader data(img);
        if (!data.ok()) throw MissingFile("missing data file for header pair: " + img.string());
        data.skip(std::max<std::int64_t>(0, std::llround(h.vox_offset)));
        if (data.read(raw.data(), raw.size()) != raw.size()) {
            throw TruncatedData(img.string() + ": voxel data shorter than header implies");
        }
    }

    v.data.resize(static_cast<std::size_t>(n));
    switch (h.datatype) {
        case kDtUint8: decode<std::uint8_t>(raw, swapped, v.data); break;
        case kDtInt16: decode<std::int16_t>(raw, swapped, v.data); break;
        case kDtUint16: decode<std::uint16_t>(raw, swapped, v.data); break;
        case kDtInt32: decode<std::int32_t>(raw, swapped, v.data); break;
        case kDtFloat32: decode<float>(raw, swapped, v.data); break;
        case kDtFloat64: decode<double>(raw, swapped, v.data); break;
        default: throw UnsupportedDatatype("unreachable");
    }

    // Apply intensity scaling; slope 0 means "not set". The (1, 0) case is
    // skipped so float payloads roundtrip bit-exactly.
    const double slope = (h.scl_slope == 0.0f) ? 1.0 : static_cast<double>(h.scl_slope);
    const double inter = static_cast<double>(h.scl_inter);
    if (slope != 1.0 || inter != 0.0) {
        for (double& x : v.data) x = x * slope + inter;
    }
    for (double x : v.data) {
        if (!std::isfinite(x)) throw NonFiniteData(path.string() + ": non-finite intensity after load");
    }

    if (h.sform_code > 0) {
        Affine4 m = identity_affine();
        for (int j = 0; j < 4; ++j) {
            m[0][j] = h.srow_x[j];
            m[1][j] = h.srow_y[j];
            m[2][j] = h.srow_z[j];
        }
        v.affine = m;
    } else if (h.qform_code > 0) {
        v.affine = affine_from_qform(h, v.spacing);
    } else {
        Affine4 m = identity_affine();
        for (int i = 0; i < 3; ++i) m[i][i] = v.spacing[i];
        v.affine = m;
    }
    return v;
}

namespace {

Nifti1Header make_header(const Volume& v, std::int16_t datatype, std::int16_t bitpix) {
    Nifti1Header h;
    std::memset(&h, 0, sizeof(h));
    h.sizeof_hdr = 348;
    h.regular = 'r';
    h.dim[0] = 3;
    for (int i = 0; i < 3; ++i) h.dim[i + 1] = static_cast<std::int16_t>(v.dims[i]);
    for (int i = 4; i < 8; ++i) h.dim[i] = 1;
    h.datatype = datatype;
    h.bitpix = bitpix;
    h.pixdim[0] = 1.0f;
    for (int i = 0; i < 3; ++i) h.pixdim[i + 1] = static_cast<float>(v.spacing[i]);
    h.vox_offset = 352.0f;
    h.scl_slope = 1.0f;
    h.scl_inter = 0.0f;
    h.xyzt_units = 2;  // millimeters
    std::strncpy(h.descrip, "inpaintbench", sizeof(h.descrip) - 1);
    h.qform_code = 0;
    h.sform_code = 1;
    for (int j = 0; j < 4; ++j) {
        h.srow_x[j] = static_cast<float>(v.affine[0][j]);
        h.srow_y[j] = static_cast<float>(v.affine[1][j]);
        h.srow_z[j] = static_cast<float>(v.affine[2][j]);
    }
    std::memcpy(h.magic, "n+1", 4);
    return h;
}

void write_nifti(const Nifti1Header& h, const void* payload, std::size_t payload_bytes,
                 const std::filesystem::path& path, bool compress) {
    const char extender[4] = {0, 0, 0, 0};
    if (compress) {
        gzFile f = gzopen(path.c_str(), "wb6");
        if (f == nullptr) throw IoFailure("cannot open " + path.string() + " for writing");
        gzbuffer(f, 1 << 18);
        bool ok = gzwrite(f, &h, sizeof(h)) == static_cast<int>(sizeof(h)) &&
                  gzwrite(f, extender, 4) == 4;
        // gzwrite takes an unsigned length; volumes here stay far below 4 GiB.
        ok = ok && gzwrite(f, payload, static_cast<unsigned>(payload_bytes)) ==
                       static_cast<int>(payload_bytes);
        ok = gzclose(f) == Z_OK && ok;
        if (!ok) throw IoFailure("write failed: " + path.string());
    } else {
        FILE* f = std::fopen(path.c_str(), "wb");
        if (f == nullptr) throw IoFailure("cannot open " + path.string() + " for writing");
        bool ok = std::fwrite(&h, 1, sizeof(h), f) == sizeof(h) &&
                  std::fwrite(extender, 1, 4, f) == 4 &&
                  std::fwrite(payload, 1, payload_bytes, f) == payload_bytes;
        ok = std::fclose(f) == 0 && ok;
        if (!ok) throw IoFailure("write failed: " + path.string());
    }
}

}  // namespace

void write_volume(const Volume& v, const std::filesystem::path& path, bool compress) {
    if (v.size() != static_cast<std::int64_t>(v.data.size())) {
        throw Error("volume data length does not match dims");
    }
    const Nifti1Header h = make_header(v, kDtFloat32, 32);
    std::vector<float> payload(v.data.size());
    for (std::size_t i = 0; i < v.data.size(); ++i) payload[i] = static_cast<float>(v.data[i]);
    write_nifti(h, payload.data(), payload.size() * sizeof(float), path, compress);
}

BinaryMask read_mask(const std::filesystem::path& path) {
    const Volume v = read_volume(path);
    BinaryMask m = make_mask(v.dims);
    for (std::size_t i = 0; i < v.data.size(); ++i) m.voxels[i] = v.data[i] != 0.0 ? 1 : 0;
    return m;
}

void write_mask(const BinaryMask& mask, const Volume& geometry,
                const std::filesystem::path& path, bool compress) {
    if (mask.dims != geometry.dims) throw DimsMismatch("mask dims do not match geometry volume");
    Volume shell;
    shell.dims = mask.dims;
    shell.spacing = geometry.spacing;
    shell.affine = geometry.affine;
    const Nifti1Header h = make_header(shell, kDtUint8, 8);
    write_nifti(h, mask.voxels.data(), mask.voxels.size(), path, compress);
}

std::filesystem::path find_case_file(const std::filesystem::path& case_dir, const std::string& stem) {
    const std::filesystem::path gz = case_dir / (stem + ".nii.gz");
    if (std::filesystem::exists(gz)) return gz;
    const std::filesystem::path plain = case_dir / (stem + ".nii");
    if (std::filesystem::exists(plain)) return plain;
    return {};
}

CaseRecord load_case(const std::filesystem::path& dataset_dir, const std::string& case_id) {
    const std::filesystem::path dir = dataset_dir / case_id;
    const auto t1_path = find_case_file(dir, case_id + "-t1n");
    if (t1_path.empty()) throw MissingFile("case " + case_id + ": missing t1 file under " + dir.string());
    const auto tumor_path = find_case_file(dir, case_id + "-mask-unhealthy");
    if (tumor_path.empty()) throw MissingFile("case " + case_id + ": missing tumor mask");

    CaseRecord rec;
    rec.case_id = case_id;
    rec.t1 = read_volume(t1_path);
    rec.tumor_mask = read_mask(tumor_path);
    if (rec.tumor_mask.dims != rec.t1.dims) {
        throw DimsMismatch("case " + case_id + ": tumor mask dims do not match t1");
    }
    if (const auto p = find_case_file(dir, case_id + "-mask-healthy"); !p.empty()) {
        rec.healthy_mask = read_mask(p);
        if (rec.healthy_mask->dims != rec.t1.dims) {
            throw DimsMismatch("case " + case_id + ": healthy mask dims do not match t1");
        }
    }
    if (const auto p = find_case_file(dir, case_id + "-t1n-voided"); !p.empty()) {
        rec.voided_t1 = read_volume(p);
        if (rec.voided_t1->dims != rec.t1.dims) {
            throw DimsMismatch("case " + case_id + ": voided t1 dims do not match t1");
        }
    }
    return rec;
}

std::vector<std::string> list_cases(const std::filesystem::path& dataset_dir) {
    std::vector<std::string> ids;
    if (!std::filesystem::is_directory(dataset_dir)) return ids;
    for (const auto& entry : std::filesystem::directory_iterator(dataset_dir)) {
        if (!entry.is_directory()) continue;
        const std::string id = entry.path().filename().string();
        if (!find_case_file(entry.path(), id + "-t1n").empty()) ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace ipb
