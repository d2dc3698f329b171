#pragma once

#include "coapcc/time.hpp"

#include <cstdint>
#include <string_view>

namespace coapcc {

enum class MessageKind : std::uint8_t { Con, Non, Ack, Rst };

std::string_view to_string(MessageKind kind);

inline constexpr std::uint32_t kRequestSize = 71; // bytes on the wire, CON requests
inline constexpr std::uint32_t kAckSize = 11;     // empty ACK

struct Message {
    MessageKind kind = MessageKind::Con;
    std::uint16_t message_id = 0;
    NodeId source = 0;
    NodeId destination = 0;
    std::uint32_t size = kRequestSize;
    SimTime created_at = 0;
    // Simulator bookkeeping, not part of the CoAP header: index of the
    // originating request within its source node.
    std::uint64_t request_serial = 0;
};

} // namespace coapcc
