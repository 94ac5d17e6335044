#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "empc/pwa.hpp"
#include "empc/wire.hpp"

namespace empc {

/// Transport-independent request/response engine: bytes in, bytes out.  Feed
/// whatever arrives on the wire; every complete request frame is answered
/// with one response frame holding the explicit law's input command.  Frames
/// that cannot be evaluated (point outside all regions, unrepresentable
/// command) are dropped and counted, never fatal — a co-simulation peer must
/// be able to spray garbage at the port without taking the server down.
class FrameServer {
public:
    explicit FrameServer(LawTables tables);

    /// Processes the chunk and returns the concatenated response frames.
    std::vector<std::uint8_t> feed(std::span<const std::uint8_t> bytes);

    std::size_t requests_served() const { return served_; }
    std::size_t requests_failed() const { return failed_; }
    std::size_t resyncs() const { return stream_.resyncs(); }

private:
    LawTables tables_;
    RequestStream stream_;
    std::size_t served_ = 0;
    std::size_t failed_ = 0;
};

/// Parameter vector for the explicit law from a decoded request frame.  A
/// five-dimensional law takes [position, speed estimate, disturbance
/// estimate, previous input, reference]; a six-dimensional one additionally
/// carries the measured speed in slot 1.
Eigen::VectorXd frame_to_parameter(const RequestFrame& frame, int dim);

}  // namespace empc
