#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

namespace empc {

inline constexpr std::size_t kRequestFrameSize = 37;
inline constexpr std::size_t kResponseFrameSize = 7;
inline constexpr int kUartBitsPerByte = 10;  //!< 8N1: start + 8 data + stop

/// Controller request as it crosses the wire: six fixed-point fields of five
/// ASCII characters each, two decimal places, interleaved with the separator
/// letters S I D C O E P.  Representable field range is [-99.99, 999.99].
struct RequestFrame {
    double position = 0.0;   //!< estimated shaft position [rad]
    double speed = 0.0;      //!< measured shaft speed [rad/s]
    double speed_est = 0.0;  //!< estimated shaft speed [rad/s]
    double dist_est = 0.0;   //!< estimated disturbance state
    double u_prev = 0.0;     //!< previously applied input [V]
    double ref = 0.0;        //!< speed reference [rad/s]
};

std::array<std::uint8_t, kRequestFrameSize> encode_request(const RequestFrame& frame);
RequestFrame decode_request(std::span<const std::uint8_t> bytes);

/// Response is 'S', five digits of the input in millivolts, 'P'; the
/// representable range is [0, 99.999] V.
std::array<std::uint8_t, kResponseFrameSize> encode_response(double u);
double decode_response(std::span<const std::uint8_t> bytes);

/// Streaming request decoder: feed bytes one at a time; a complete valid
/// frame is returned as soon as its last byte arrives.  On a malformed byte
/// the decoder drops the partial frame, counts a resync, and scans for the
/// next 'S'.  It never throws, so line garbage cannot take the receiver down.
class RequestStream {
public:
    std::optional<RequestFrame> push(std::uint8_t byte);
    std::size_t frames_decoded() const { return frames_; }
    std::size_t resyncs() const { return resyncs_; }

private:
    std::array<std::uint8_t, kRequestFrameSize> buf_{};
    std::size_t fill_ = 0;
    std::size_t frames_ = 0;
    std::size_t resyncs_ = 0;
};

/// Streaming decoder for the 7-byte response frame, same resync behavior.
class ResponseStream {
public:
    std::optional<double> push(std::uint8_t byte);
    std::size_t frames_decoded() const { return frames_; }
    std::size_t resyncs() const { return resyncs_; }

private:
    std::array<std::uint8_t, kResponseFrameSize> buf_{};
    std::size_t fill_ = 0;
    std::size_t frames_ = 0;
    std::size_t resyncs_ = 0;
};

/// Seconds on the wire for `bits` at `baud` (UART framing already included
/// when the count comes from the helpers below).
double frame_time(double baud, int bits);

constexpr int request_bits() { return static_cast<int>(kRequestFrameSize) * kUartBitsPerByte; }
constexpr int response_bits() { return static_cast<int>(kResponseFrameSize) * kUartBitsPerByte; }

}  // namespace empc
