#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "markbench/audio_buffer.hpp"

namespace markbench {

enum class WavEncoding { pcm16, pcm24, float32 };

WavEncoding parse_wav_encoding(std::string_view name);
std::string_view to_string(WavEncoding encoding);

/// Reads a RIFF/WAVE file (PCM 16/24-bit or IEEE float 32) and averages all
/// channels to mono. Unknown chunks are skipped.
AudioBuffer read_wav(const std::filesystem::path& path);
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);

/// Writes a canonical RIFF/WAVE file. Integer encodings clamp to [-1, 1) and
/// round half away from zero.
void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
               WavEncoding encoding = WavEncoding::float32);
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer, WavEncoding encoding);

}  // namespace markbench
