#include "empc/wire.hpp"

#include <cmath>
#include <string>

#include "empc/errors.hpp"

namespace empc {

namespace {

// Separator letters at offsets 0, 6, 12, ... of the request frame.
constexpr char kSeparators[7] = {'S', 'I', 'D', 'C', 'O', 'E', 'P'};

bool is_digit(std::uint8_t byte) { return byte >= '0' && byte <= '9'; }

bool is_separator_offset(std::size_t offset) { return offset % 6 == 0; }

/// Scaled fixed-point value of one request field: two decimal places,
/// half-away-from-zero rounding.
long long scale_request_value(double value, const char* name) {
    if (!std::isfinite(value)) {
        throw RangeError(std::string(name) + " is not finite");
    }
    const long long scaled = std::llround(value * 100.0);
    if (scaled < -9999 || scaled > 99999) {
        throw RangeError(std::string(name) + " = " + std::to_string(value) +
                         " is outside the representable range [-99.99, 999.99]");
    }
    return scaled;
}

void encode_field(std::uint8_t* dst, long long scaled) {
    if (scaled < 0) {
        dst[0] = '-';
        long long magnitude = -scaled;
        for (int i = 4; i >= 1; --i) {
            dst[i] = static_cast<std::uint8_t>('0' + magnitude % 10);
            magnitude /= 10;
        }
    } else {
        for (int i = 4; i >= 0; --i) {
            dst[i] = static_cast<std::uint8_t>('0' + scaled % 10);
            scaled /= 10;
        }
    }
}

double decode_field(std::span<const std::uint8_t> bytes, std::size_t base) {
    long long magnitude = 0;
    const bool negative = bytes[base] == '-';
    for (std::size_t i = negative ? 1 : 0; i < 5; ++i) {
        const std::uint8_t byte = bytes[base + i];
        if (!is_digit(byte)) {
            throw FrameError("expected digit at frame offset " + std::to_string(base + i),
                             base + i);
        }
        magnitude = magnitude * 10 + (byte - '0');
    }
    return (negative ? -magnitude : magnitude) / 100.0;
}

}  // namespace

std::array<std::uint8_t, kRequestFrameSize> encode_request(const RequestFrame& frame) {
    const double values[6] = {frame.position, frame.speed,  frame.speed_est,
                              frame.dist_est, frame.u_prev, frame.ref};
    const char* names[6] = {"position", "speed", "speed estimate",
                            "disturbance estimate", "previous input", "reference"};

    std::array<std::uint8_t, kRequestFrameSize> out{};
    for (int k = 0; k < 7; ++k) {
        out[static_cast<std::size_t>(6 * k)] = static_cast<std::uint8_t>(kSeparators[k]);
    }
    for (int k = 0; k < 6; ++k) {
        encode_field(out.data() + 6 * k + 1, scale_request_value(values[k], names[k]));
    }
    return out;
}

RequestFrame decode_request(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kRequestFrameSize) {
        throw FrameError("request frame must be 37 bytes, got " + std::to_string(bytes.size()),
                         bytes.size());
    }
    for (int k = 0; k < 7; ++k) {
        const std::size_t offset = static_cast<std::size_t>(6 * k);
        if (bytes[offset] != static_cast<std::uint8_t>(kSeparators[k])) {
            throw FrameError(std::string("expected separator '") + kSeparators[k] +
                                 "' at frame offset " + std::to_string(offset),
                             offset);
        }
    }
    RequestFrame frame;
    frame.position = decode_field(bytes, 1);
    frame.speed = decode_field(bytes, 7);
    frame.speed_est = decode_field(bytes, 13);
    frame.dist_est = decode_field(bytes, 19);
    frame.u_prev = decode_field(bytes, 25);
    frame.ref = decode_field(bytes, 31);
    return frame;
}

std::array<std::uint8_t, kResponseFrameSize> encode_response(double u) {
    if (!std::isfinite(u)) {
        throw RangeError("input command is not finite");
    }
    long long scaled = std::llround(u * 1000.0);
    if (scaled < 0 || scaled > 99999) {
        throw RangeError("input command " + std::to_string(u) +
                         " is outside the representable range [0, 99.999]");
    }
    std::array<std::uint8_t, kResponseFrameSize> out{};
    out[0] = 'S';
    out[6] = 'P';
    for (int i = 5; i >= 1; --i) {
        out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>('0' + scaled % 10);
        scaled /= 10;
    }
    return out;
}

double decode_response(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kResponseFrameSize) {
        throw FrameError("response frame must be 7 bytes, got " + std::to_string(bytes.size()),
                         bytes.size());
    }
    if (bytes[0] != 'S') throw FrameError("expected 'S' at frame offset 0", 0);
    if (bytes[6] != 'P') throw FrameError("expected 'P' at frame offset 6", 6);
    long long scaled = 0;
    for (std::size_t i = 1; i <= 5; ++i) {
        if (!is_digit(bytes[i])) {
            throw FrameError("expected digit at frame offset " + std::to_string(i), i);
        }
        scaled = scaled * 10 + (bytes[i] - '0');
    }
    return scaled / 1000.0;
}

std::optional<RequestFrame> RequestStream::push(std::uint8_t byte) {
    const auto valid_at = [](std::uint8_t b, std::size_t offset) {
        if (is_separator_offset(offset)) {
            return b == static_cast<std::uint8_t>(kSeparators[offset / 6]);
        }
        // '-' is only legal as the first character of a field.
        return is_digit(b) || (b == '-' && offset % 6 == 1);
    };

    if (fill_ == 0) {
        if (byte != 'S') return std::nullopt;  // scanning for a frame start
        buf_[fill_++] = byte;
        return std::nullopt;
    }

    if (!valid_at(byte, fill_)) {
        ++resyncs_;
        fill_ = 0;
        if (byte == 'S') buf_[fill_++] = byte;
        return std::nullopt;
    }

    buf_[fill_++] = byte;
    if (fill_ < kRequestFrameSize) return std::nullopt;

    fill_ = 0;
    ++frames_;
    return decode_request(buf_);
}

std::optional<double> ResponseStream::push(std::uint8_t byte) {
    const auto valid_at = [](std::uint8_t b, std::size_t offset) {
        if (offset == 0) return b == std::uint8_t{'S'};
        if (offset == 6) return b == std::uint8_t{'P'};
        return is_digit(b);
    };

    if (fill_ == 0) {
        if (byte != 'S') return std::nullopt;
        buf_[fill_++] = byte;
        return std::nullopt;
    }

    if (!valid_at(byte, fill_)) {
        ++resyncs_;
        fill_ = 0;
        if (byte == 'S') buf_[fill_++] = byte;
        return std::nullopt;
    }

    buf_[fill_++] = byte;
    if (fill_ < kResponseFrameSize) return std::nullopt;

    fill_ = 0;
    ++frames_;
    return decode_response(buf_);
}

double frame_time(double baud, int bits) {
    if (!(baud > 0.0)) throw InvalidParameter("baud rate must be positive");
    if (bits <= 0) throw InvalidParameter("bit count must be positive");
    return static_cast<double>(bits) / baud;
}

}  // namespace empc
