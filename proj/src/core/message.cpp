#include "swarnet/core/message.hpp"

namespace swarnet::core {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::uint32_t topic_bytes(const routing::LocalSubscriptionSet& topics) {
  std::uint32_t n = 0;
  for (const auto& t : topics) n += static_cast<std::uint32_t>(t.name.size()) + 2;
  return n;
}

std::uint32_t table_bytes(const routing::ForwardingTable& table) {
  std::uint32_t n = 0;
  for (const auto& [topic, hops] : table) {
    n += static_cast<std::uint32_t>(topic.name.size()) + 2 + 4 * static_cast<std::uint32_t>(hops.size());
  }
  return n;
}

}  // namespace

std::string_view kind_name(const MessageBody& body) {
  return std::visit(Overloaded{
                        [](const JoinRequest&) { return std::string_view{"join"}; },
                        [](const JoinRedirect&) { return std::string_view{"redirect"}; },
                        [](const JoinAccept&) { return std::string_view{"accept"}; },
                        [](const SubscriptionUpdate&) { return std::string_view{"sub"}; },
                        [](const RoutingPush&) { return std::string_view{"push"}; },
                        [](const Publication&) { return std::string_view{"pub"}; },
                        [](const Beacon&) { return std::string_view{"beacon"}; },
                        [](const PromoteToRelay&) { return std::string_view{"promote"}; },
                        [](const RelayAck&) { return std::string_view{"relay_ack"}; },
                    },
                    body);
}

std::uint32_t wire_size(const MessageBody& body) {
  return kHeaderBytes +
         std::visit(Overloaded{
                        [](const JoinRequest& m) {
                          return static_cast<std::uint32_t>(m.ssid.size()) + 2 + topic_bytes(m.subscriptions);
                        },
                        [](const JoinRedirect&) { return std::uint32_t{4}; },
                        [](const JoinAccept& m) { return 6 + table_bytes(m.table); },
                        [](const SubscriptionUpdate& m) {
                          return 1 + static_cast<std::uint32_t>(m.topic.name.size()) + 2;
                        },
                        [](const RoutingPush& m) { return table_bytes(m.table); },
                        [](const Publication& m) { return m.payload_bytes; },
                        [](const Beacon&) { return std::uint32_t{12}; },
                        [](const PromoteToRelay& m) {
                          return static_cast<std::uint32_t>(m.credentials.ssid.size() +
                                                            m.credentials.passphrase.size()) +
                                 8;
                        },
                        [](const RelayAck&) { return std::uint32_t{5}; },
                    },
                    body);
}

}  // namespace swarnet::core
