#include "flowforge/capture.hpp"

#include <cerrno>
#include <cstring>
#include <stdexcept>

#include <net/if.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/ioctl.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <time.h>
#include <unistd.h>

#include <linux/if_ether.h>
#include <linux/if_packet.h>

namespace flowforge {

CaptureSource::Poll PcapReplaySource::poll(RawRecord& out, int timeout_ms) {
    (void)timeout_ms;
    return reader_.next(out) ? Poll::packet : Poll::closed;
}

void FakeLiveSource::push(RawRecord record) {
    {
        std::lock_guard lock(mu_);
        queue_.push_back(std::move(record));
    }
    cv_.notify_one();
}

void FakeLiveSource::close() {
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

CaptureSource::Poll FakeLiveSource::poll(RawRecord& out, int timeout_ms) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms),
                 [&] { return !queue_.empty() || closed_; });
    if (!queue_.empty()) {
        out = std::move(queue_.front());
        queue_.pop_front();
        return Poll::packet;
    }
    return closed_ ? Poll::closed : Poll::timeout;
}

AfPacketSource::AfPacketSource(const std::string& iface) {
    fd_ = socket(AF_PACKET, SOCK_RAW, htons(ETH_P_ALL));
    if (fd_ < 0) {
        throw std::runtime_error("cannot open AF_PACKET socket on " + iface + ": " +
                                 std::strerror(errno) + " (needs CAP_NET_RAW)");
    }

    ifreq ifr{};
    std::strncpy(ifr.ifr_name, iface.c_str(), sizeof(ifr.ifr_name) - 1);
    if (ioctl(fd_, SIOCGIFINDEX, &ifr) < 0) {
        const int err = errno;
        ::close(fd_);
        fd_ = -1;
        throw std::runtime_error("no such interface: " + iface + ": " + std::strerror(err));
    }

    sockaddr_ll addr{};
    addr.sll_family = AF_PACKET;
    addr.sll_protocol = htons(ETH_P_ALL);
    addr.sll_ifindex = ifr.ifr_ifindex;
    if (bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        const int err = errno;
        ::close(fd_);
        fd_ = -1;
        throw std::runtime_error("cannot bind capture socket to " + iface + ": " +
                                 std::strerror(err));
    }
}

AfPacketSource::~AfPacketSource() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

CaptureSource::Poll AfPacketSource::poll(RawRecord& out, int timeout_ms) {
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, timeout_ms);
    if (ready == 0) {
        return Poll::timeout;
    }
    if (ready < 0) {
        return errno == EINTR ? Poll::timeout : Poll::closed;
    }

    out.data.resize(65536);
    const ssize_t n = recv(fd_, out.data.data(), out.data.size(), MSG_TRUNC);
    if (n <= 0) {
        return errno == EINTR ? Poll::timeout : Poll::closed;
    }
    // MSG_TRUNC makes recv report the original frame length even if our
    // buffer clipped it.
    out.orig_len = static_cast<uint32_t>(n);
    out.data.resize(std::min<size_t>(static_cast<size_t>(n), out.data.size()));

    timespec ts{};
    clock_gettime(CLOCK_REALTIME, &ts);
    out.timestamp_ns =
        static_cast<uint64_t>(ts.tv_sec) * 1000000000ull + static_cast<uint64_t>(ts.tv_nsec);
    return Poll::packet;
}

}  // namespace flowforge
