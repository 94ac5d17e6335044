#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "empc/errors.hpp"
#include "empc/wire.hpp"
#include "oracles.hpp"

using namespace empc;

namespace {

std::string as_string(std::span<const std::uint8_t> bytes) {
    return std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

RequestFrame random_frame(std::mt19937& rng) {
    RequestFrame frame;
    frame.position = oracle::uniform(rng, -99.99, 999.99);
    frame.speed = oracle::uniform(rng, -99.99, 999.99);
    frame.speed_est = oracle::uniform(rng, -99.99, 999.99);
    frame.dist_est = oracle::uniform(rng, -99.99, 999.99);
    frame.u_prev = oracle::uniform(rng, 0.0, 24.0);
    frame.ref = oracle::uniform(rng, 0.0, 50.0);
    return frame;
}

bool frames_equal(const RequestFrame& a, const RequestFrame& b) {
    return a.position == b.position && a.speed == b.speed && a.speed_est == b.speed_est &&
           a.dist_est == b.dist_est && a.u_prev == b.u_prev && a.ref == b.ref;
}

}  // namespace

TEST_SUITE("wire") {
    TEST_CASE("request encoding writes the documented byte layout") {
        RequestFrame frame;
        frame.position = 12.34;
        frame.speed = 5.6;
        frame.speed_est = -0.15;
        frame.dist_est = 0.0;
        frame.u_prev = 23.9;
        frame.ref = 20.0;

        const auto bytes = encode_request(frame);
        CHECK(as_string(bytes) == "S01234I00560D-0015C00000O02390E02000P");

        const auto zeros = encode_request(RequestFrame{});
        CHECK(as_string(zeros) == "S00000I00000D00000C00000O00000E00000P");
    }

    TEST_CASE("field scaling rounds to hundredths") {
        RequestFrame frame;
        frame.position = 0.005;  // rounds half away from zero
        auto bytes = encode_request(frame);
        CHECK(as_string(bytes).substr(1, 5) == "00001");

        frame.position = -0.005;
        bytes = encode_request(frame);
        CHECK(as_string(bytes).substr(1, 5) == "-0001");

        frame.position = 999.994;  // just inside the top of the range
        bytes = encode_request(frame);
        CHECK(as_string(bytes).substr(1, 5) == "99999");
    }

    TEST_CASE("out-of-range fields are refused") {
        RequestFrame frame;
        frame.position = 999.996;  // would need six characters
        CHECK_THROWS_AS(encode_request(frame), RangeError);
        frame.position = -99.995;
        CHECK_THROWS_AS(encode_request(frame), RangeError);
        frame.position = -100.0;
        CHECK_THROWS_AS(encode_request(frame), RangeError);
        frame.position = std::nan("");
        CHECK_THROWS_AS(encode_request(frame), RangeError);
    }

    TEST_CASE("request decoding round-trips within the quantization step") {
        std::mt19937 rng(77);
        for (int trial = 0; trial < 500; ++trial) {
            const RequestFrame frame = random_frame(rng);
            const RequestFrame back = decode_request(encode_request(frame));
            CHECK(std::abs(back.position - frame.position) <= 0.005);
            CHECK(std::abs(back.speed - frame.speed) <= 0.005);
            CHECK(std::abs(back.speed_est - frame.speed_est) <= 0.005);
            CHECK(std::abs(back.dist_est - frame.dist_est) <= 0.005);
            CHECK(std::abs(back.u_prev - frame.u_prev) <= 0.005);
            CHECK(std::abs(back.ref - frame.ref) <= 0.005);

            // Decoded values sit exactly on the hundredths grid, so a second
            // trip is lossless.
            CHECK(frames_equal(decode_request(encode_request(back)), back));
        }
    }

    TEST_CASE("request decoding flags the exact offending byte") {
        const auto good = encode_request(RequestFrame{});

        auto bad = good;
        bad[6] = 'X';  // separator of the second field
        try {
            decode_request(bad);
            FAIL("expected FrameError");
        } catch (const FrameError& e) {
            CHECK(e.offset == 6);
        }

        bad = good;
        bad[3] = 'a';  // digit position
        try {
            decode_request(bad);
            FAIL("expected FrameError");
        } catch (const FrameError& e) {
            CHECK(e.offset == 3);
        }

        bad = good;
        bad[2] = '-';  // sign only allowed at the first character of a field
        CHECK_THROWS_AS(decode_request(bad), FrameError);

        CHECK_THROWS_AS(decode_request(std::span<const std::uint8_t>(good.data(), 36)),
                        FrameError);
    }

    TEST_CASE("response coding in millivolts") {
        CHECK(as_string(encode_response(0.0)) == "S00000P");
        CHECK(as_string(encode_response(12.345)) == "S12345P");
        CHECK(as_string(encode_response(24.0)) == "S24000P");
        CHECK(decode_response(encode_response(24.0)) == 24.0);
        CHECK(as_string(encode_response(99.9994)) == "S99999P");
        CHECK(as_string(encode_response(-0.0004)) == "S00000P");  // rounds to zero

        CHECK_THROWS_AS(encode_response(99.9996), RangeError);
        CHECK_THROWS_AS(encode_response(-0.001), RangeError);

        std::mt19937 rng(31);
        for (int trial = 0; trial < 500; ++trial) {
            const double u = oracle::uniform(rng, 0.0, 24.0);
            CHECK(std::abs(decode_response(encode_response(u)) - u) <= 0.0005);
        }
    }

    TEST_CASE("streaming request decoding equals batch decoding") {
        std::mt19937 rng(55);
        std::vector<RequestFrame> sent;
        std::vector<std::uint8_t> wire;
        for (int i = 0; i < 50; ++i) {
            const RequestFrame frame = random_frame(rng);
            const auto bytes = encode_request(frame);
            sent.push_back(decode_request(bytes));  // grid-snapped reference
            wire.insert(wire.end(), bytes.begin(), bytes.end());
        }

        RequestStream stream;
        std::vector<RequestFrame> received;
        for (std::uint8_t byte : wire) {
            if (const auto frame = stream.push(byte)) received.push_back(*frame);
        }

        REQUIRE(received.size() == sent.size());
        for (std::size_t i = 0; i < sent.size(); ++i) {
            CHECK(frames_equal(received[i], sent[i]));
        }
        CHECK(stream.frames_decoded() == sent.size());
        CHECK(stream.resyncs() == 0);
    }

    TEST_CASE("streams recover from line garbage") {
        const auto frame_bytes = encode_request(RequestFrame{});

        RequestStream stream;
        std::vector<std::uint8_t> wire;
        const std::string garbage = "zz7!\xff PQRS";  // ends with a stray 'S'
        wire.insert(wire.end(), garbage.begin(), garbage.end());
        wire.insert(wire.end(), frame_bytes.begin(), frame_bytes.end());

        int decoded = 0;
        for (std::uint8_t byte : wire) {
            if (stream.push(byte)) ++decoded;
        }
        CHECK(decoded == 1);
        CHECK(stream.resyncs() >= 1);

        // A frame chopped in the middle followed by a full frame: exactly the
        // full frame comes out.
        RequestStream chopped;
        decoded = 0;
        for (std::size_t i = 0; i < 20; ++i) {
            if (chopped.push(frame_bytes[i])) ++decoded;
        }
        // mid-frame corruption byte
        if (chopped.push('?')) ++decoded;
        for (std::uint8_t byte : frame_bytes) {
            if (chopped.push(byte)) ++decoded;
        }
        CHECK(decoded == 1);
        CHECK(chopped.resyncs() >= 1);
    }

    TEST_CASE("response stream behaves symmetrically") {
        const auto bytes = encode_response(13.5);
        ResponseStream stream;

        // Garbage, then two valid frames back to back.
        for (char c : std::string("noise")) stream.push(static_cast<std::uint8_t>(c));
        int decoded = 0;
        double last = -1.0;
        for (int rep = 0; rep < 2; ++rep) {
            for (std::uint8_t byte : bytes) {
                if (const auto u = stream.push(byte)) {
                    ++decoded;
                    last = *u;
                }
            }
        }
        CHECK(decoded == 2);
        CHECK(last == 13.5);
        CHECK(stream.frames_decoded() == 2);
    }

    TEST_CASE("frame sizes and timing") {
        CHECK(kRequestFrameSize == 37);
        CHECK(kResponseFrameSize == 7);
        CHECK(request_bits() == 370);
        CHECK(response_bits() == 70);

        // 8N1 framing at 115200 baud.
        CHECK(frame_time(115200.0, response_bits()) ==
              doctest::Approx(70.0 / 115200.0).epsilon(1e-14));
        CHECK(frame_time(115200.0, request_bits()) ==
              doctest::Approx(3.2118e-3).epsilon(1e-4));

        // One full exchange cannot fit inside a 1 ms sample but fits easily
        // in 5 ms with margin.
        const double exchange =
            frame_time(115200.0, request_bits() + response_bits());
        CHECK(exchange == doctest::Approx(3.8194e-3).epsilon(1e-4));
        CHECK(exchange > 1e-3);
        CHECK(exchange < 0.8 * 5e-3);

        CHECK_THROWS_AS(frame_time(0.0, 100), InvalidParameter);
        CHECK_THROWS_AS(frame_time(-9600.0, 100), InvalidParameter);
    }
}
