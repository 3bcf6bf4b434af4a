#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tonelut/embed.hpp"
#include "tonelut/image.hpp"
#include "tonelut/lut.hpp"
#include "tonelut/network.hpp"
#include "tonelut/train.hpp"

namespace tonelut {

// ---------------------------------------------------------------------------
// .cube

struct CubeFile {
    std::string title;
    Rgb domain_min{0.0, 0.0, 0.0};
    Rgb domain_max{1.0, 1.0, 1.0};
    Lut3D lut;
};

/// Resamples a LUT with non-uniform coordinates onto the uniform grid of the
/// same size by evaluating the transform at the grid points.
Lut3D rebake_uniform(const Lut3D& lut, const SamplingCoordinates& coords);

/// TITLE (optional), LUT_3D_SIZE, DOMAIN_MIN/MAX, then N^3 "r g b" rows with
/// six decimals, red fastest. Non-uniform coordinates are rebaked first.
std::string format_cube(const Lut3D& lut, const SamplingCoordinates& coords, const std::string& title = {});
void write_cube(const Lut3D& lut, const SamplingCoordinates& coords, const std::filesystem::path& path,
                const std::string& title = {});

/// Throws Error(parse) with a line number on malformed input and
/// Error(format) for a grid size below 2.
CubeFile parse_cube(std::string_view text);
CubeFile read_cube(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Images

/// 8-bit RGB or RGBA PNG (alpha dropped). Throws Error(format) otherwise.
ImageBuffer decode_png(std::string_view bytes);
std::string encode_png(const ImageBuffer& image);
/// ASCII P3 PPM with maxval up to 255.
ImageBuffer parse_ppm(std::string_view text);
std::string format_ppm(const ImageBuffer& image);

/// Dispatches on the file signature: PNG or P3 PPM.
ImageBuffer read_image(const std::filesystem::path& path);
/// Dispatches on the extension: .ppm writes P3, anything else PNG.
void write_image(const ImageBuffer& image, const std::filesystem::path& path);

/// Every .png / .ppm in the directory, sorted by file name.
std::vector<ImageBuffer> read_image_directory(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Embedding store (JSON lines)

/// Records `{"key": ..., "dim": n, "values": [...]}`, optionally preceded by
/// a header `{"model": ..., "dim": n}`.
EmbeddingProvider parse_embedding_store(std::string_view text);
EmbeddingProvider read_embedding_store(const std::filesystem::path& path);
std::string format_embedding_store(const EmbeddingProvider& provider);
void write_embedding_store(const EmbeddingProvider& provider, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    ModelBundle bundle;
    TrainConfig train_config;
    std::optional<TrainerState> trainer;
};

/// Binary layout: 8-byte magic, u32 version, u64 header length, JSON header,
/// then every parameter as a little-endian IEEE double.
std::string serialize_checkpoint(const Checkpoint& checkpoint);
/// Throws Error(version) on a bad magic or version, Error(format) otherwise.
Checkpoint deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string content_hash(std::string_view bytes);

// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

}  // namespace tonelut
