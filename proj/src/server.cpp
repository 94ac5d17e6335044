#include "empc/server.hpp"

#include <utility>

#include "empc/errors.hpp"

namespace empc {

Eigen::VectorXd frame_to_parameter(const RequestFrame& frame, int dim) {
    Eigen::VectorXd x(dim);
    if (dim == 5) {
        x << frame.position, frame.speed_est, frame.dist_est, frame.u_prev, frame.ref;
    } else if (dim == 6) {
        x << frame.position, frame.speed, frame.speed_est, frame.dist_est, frame.u_prev,
            frame.ref;
    } else {
        throw InvalidParameter("frame_to_parameter: only 5- or 6-dimensional laws map onto "
                               "the wire format");
    }
    return x;
}

FrameServer::FrameServer(LawTables tables) : tables_(std::move(tables)) {
    if (tables_.dim != 5 && tables_.dim != 6) {
        throw InvalidParameter("FrameServer: law parameter dimension must be 5 or 6 to match "
                               "the request frame");
    }
    if (tables_.l != 1) {
        throw InvalidParameter("FrameServer: the response frame carries exactly one input");
    }
}

std::vector<std::uint8_t> FrameServer::feed(std::span<const std::uint8_t> bytes) {
    std::vector<std::uint8_t> responses;
    for (std::uint8_t byte : bytes) {
        const auto frame = stream_.push(byte);
        if (!frame) continue;
        try {
            const Eigen::VectorXd x = frame_to_parameter(*frame, static_cast<int>(tables_.dim));
            const SearchResult hit = tables_search(tables_, x);
            const auto reply = encode_response(hit.u(0));
            responses.insert(responses.end(), reply.begin(), reply.end());
            ++served_;
        } catch (const Error&) {
            ++failed_;  // drop the frame, stay alive
        }
    }
    return responses;
}

}  // namespace empc
