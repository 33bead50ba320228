#include "metasim/channel.hpp"

#include <cstring>

namespace metasim {

Hash32 channel_id_for(const Address& sender, const Address& miner,
                      std::uint64_t open_nonce) {
    std::vector<std::uint8_t> pre;
    const char* tag = "metasim/channel";
    pre.insert(pre.end(), tag, tag + std::strlen(tag));
    pre.insert(pre.end(), sender.id.begin(), sender.id.end());
    pre.push_back(static_cast<std::uint8_t>(sender.kind));
    pre.insert(pre.end(), miner.id.begin(), miner.id.end());
    pre.push_back(static_cast<std::uint8_t>(miner.kind));
    for (int i = 7; i >= 0; --i)
        pre.push_back(static_cast<std::uint8_t>(open_nonce >> (8 * i)));
    return sha256(pre);
}

}  // namespace metasim
