#pragma once

// TCP transport for the line protocol: one independent session per
// connection, each on its own thread.

#include <boost/asio.hpp>

#include <atomic>
#include <list>
#include <mutex>
#include <thread>

#include "acdsim/protocol.hpp"

namespace acdsim {

class TcpServer {
 public:
  /// Binds to 127.0.0.1:`port`; port 0 picks a free one.
  TcpServer(ScenarioConfig config, unsigned short port, ProtocolOptions options = {})
      : config_(std::move(config)),
        options_(options),
        acceptor_(io_, boost::asio::ip::tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), port)) {
    // Fail at bind time, not per connection.
    ProtocolSession probe(config_, options_);
  }

  ~TcpServer() {
    stop();
    std::lock_guard lock(mu_);
    for (auto& t : workers_) {
      if (t.joinable()) t.join();
    }
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  /// Accepts connections until stop(). Blocks.
  void run() {
    using boost::asio::ip::tcp;
    while (!stopped_) {
      boost::system::error_code ec;
      tcp::socket socket(io_);
      acceptor_.accept(socket, ec);
      if (ec) {
        if (stopped_) break;
        continue;
      }
      std::lock_guard lock(mu_);
      workers_.emplace_back([this, s = std::move(socket)]() mutable {
        tcp::iostream stream(std::move(s));
        try {
          serve_stream(config_, stream, stream, options_);
        } catch (const std::exception&) {
          // connection dropped
        }
      });
    }
  }

  void stop() {
    if (stopped_.exchange(true)) return;
    boost::system::error_code ec;
    // A blocking accept does not wake on close; poke it with a connection.
    const auto endpoint = acceptor_.local_endpoint(ec);
    if (!ec) {
      boost::asio::io_context io;
      boost::asio::ip::tcp::socket poke(io);
      poke.connect(endpoint, ec);
    }
    acceptor_.close(ec);
  }

 private:
  ScenarioConfig config_;
  ProtocolOptions options_;
  boost::asio::io_context io_;
  boost::asio::ip::tcp::acceptor acceptor_;
  std::atomic<bool> stopped_{false};
  std::mutex mu_;
  std::list<std::thread> workers_;
};

}  // namespace acdsim
