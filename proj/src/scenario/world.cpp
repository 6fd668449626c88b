#include "constellation/scenario/world.hpp"

#include "constellation/aip/message.hpp"

namespace constellation::scenario {

World::World(WorldConfig cfg) : cfg_(std::move(cfg)) {
    net_ = std::make_unique<sim::Network>(clock_, cfg_.seed);
    net_->set_classifier([](const sim::Bytes& f) { return aip::peek_type(f); });
    net_->duplicate_labels(cfg_.duplicate_labels);

    std::vector<aip::DeviceEntry> entries;
    for (const auto& d : cfg_.devices) {
        auto outages = cfg_.outages.count(d.id) ? cfg_.outages.at(d.id) : std::vector<sim::Outage>{};
        net_->add_link({kConstellationNode, d.id, cfg_.wan, outages});
        net_->add_link({d.id, client_node(d.id), d.local, {}});
        entries.push_back({d.id, d.user_config});
    }
    constellation_transport_ = std::make_unique<aip::SimTransport>(*net_, kConstellationNode);
    auto ccfg = cfg_.client;
    ccfg.seed = cfg_.seed;
    client_ = std::make_unique<aip::ConstellationClient>(clock_, *constellation_transport_, ccfg, entries);

    for (const auto& d : cfg_.devices) {
        Device dev;
        dev.start_client = d.start_client;
        dev.server_transport = std::make_unique<aip::SimTransport>(*net_, d.id);
        dev.client_transport = std::make_unique<aip::SimTransport>(*net_, client_node(d.id));
        auto reasoner = std::make_shared<agent::ScriptedReasoner>(agent::load_reasoner_script(d.reasoner));
        auto exec = agent::make_executor(d.executor, d.telemetry);
        dev.server = std::make_unique<agent::DeviceAgentServer>(clock_, *dev.server_transport, d.manifest, reasoner,
                                                                d.server);
        dev.client = std::make_unique<agent::DeviceAgentClient>(clock_, *dev.client_transport, d.id, exec, d.telemetry);
        devices_.emplace(d.id, std::move(dev));
    }
}

void World::start() {
    for (auto& [id, d] : devices_) {
        d.server->start();
        if (d.start_client) d.client->start();
    }
    client_->start();
}

std::vector<DeviceId> World::device_ids() const {
    std::vector<DeviceId> out;
    for (const auto& [id, d] : devices_) out.push_back(id);
    return out;
}

bool World::idle() const {
    for (const auto& [id, d] : devices_)
        if (d.server->busy() || d.server->queued() > 0 || d.client->busy()) return false;
    const auto& log = net_->wire_log();
    for (auto it = log.rbegin(); it != log.rend(); ++it)
        if (it->delivered && *it->delivered > clock_.now()) return false;
    return true;
}

void World::drain(double limit) {
    const double until = clock_.now() + limit;
    while (!idle() && clock_.next_time() <= until) clock_.step();
}

}  // namespace constellation::scenario
