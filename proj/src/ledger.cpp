#include "sag/ledger.hpp"

#include <algorithm>
#include <utility>

namespace sag {

std::string_view to_string(BufferKind kind) {
    switch (kind) {
        case BufferKind::topology_gradient: return "topology_gradient";
        case BufferKind::feature_gradient: return "feature_gradient";
        case BufferKind::feature_copies: return "feature_copies";
        case BufferKind::duals: return "duals";
        case BufferKind::perturbation_blocks: return "perturbation_blocks";
    }
    return "unknown";
}

BufferLedger::Lease::Lease(BufferLedger* ledger, BufferKind kind, std::size_t elements)
    : ledger_(ledger), kind_(kind), elements_(elements) {
    if (!ledger_) return;
    const auto k = static_cast<std::size_t>(kind_);
    ledger_->live_[k] += elements_;
    ledger_->peak_[k] = std::max(ledger_->peak_[k], ledger_->live_[k]);
}

BufferLedger::Lease::Lease(Lease&& other) noexcept
    : ledger_(std::exchange(other.ledger_, nullptr)), kind_(other.kind_), elements_(other.elements_) {}

BufferLedger::Lease& BufferLedger::Lease::operator=(Lease&& other) noexcept {
    if (this != &other) {
        release();
        ledger_ = std::exchange(other.ledger_, nullptr);
        kind_ = other.kind_;
        elements_ = other.elements_;
    }
    return *this;
}

BufferLedger::Lease::~Lease() { release(); }

void BufferLedger::Lease::release() {
    if (!ledger_) return;
    ledger_->live_[static_cast<std::size_t>(kind_)] -= elements_;
    ledger_ = nullptr;
}

LedgerPeaks snapshot_peaks(const BufferLedger& ledger) {
    LedgerPeaks p;
    for (std::size_t k = 0; k < kBufferKinds; ++k) p.elements[k] = ledger.peak(static_cast<BufferKind>(k));
    return p;
}

}  // namespace sag
