#include "trustya/server/net.hpp"

#include <atomic>
#include <deque>
#include <map>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace trustya::server {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

}  // namespace

struct Server::Impl {
  class WsConnection;

  // A session plus the strand that serializes everything touching it.
  struct Host {
    std::shared_ptr<Session> session;
    asio::strand<asio::io_context::executor_type> strand;
    asio::steady_timer timer;

    Host(std::shared_ptr<Session> s, asio::io_context& io)
        : session(std::move(s)), strand(asio::make_strand(io)), timer(strand) {}
  };

  // Declared first so pending handlers are destroyed while the maps below
  // still exist.
  asio::io_context io;
  SessionManager& manager;
  ServerOptions options;
  tcp::acceptor acceptor{io};
  std::vector<std::thread> threads;
  std::atomic<ConnectionId> next_conn{0};

  std::mutex registry_mutex;
  std::map<ConnectionId, std::weak_ptr<WsConnection>> connections;
  std::map<std::string, std::shared_ptr<Host>> hosts;

  Impl(SessionManager& m, ServerOptions o) : manager(m), options(std::move(o)) {}
  ~Impl() { io.stop(); }

  std::shared_ptr<Host> host_for(const std::string& id) {
    std::lock_guard lock(registry_mutex);
    if (auto it = hosts.find(id); it != hosts.end()) return it->second;
    auto session = manager.find(id);
    if (!session) return nullptr;
    auto host = std::make_shared<Host>(std::move(session), io);
    hosts[id] = host;
    return host;
  }

  void deliver(const std::vector<Outbound>& out);

  // Runs on the host strand after every session call.
  void after_call(const std::shared_ptr<Host>& host) {
    if (host->session->state() == SessionState::Over) {
      manager.archive(*host->session);
      host->timer.cancel();
      return;
    }
    const auto deadline = host->session->next_deadline();
    if (!deadline) return;
    host->timer.expires_at(*deadline);
    host->timer.async_wait([self = this, host](beast::error_code ec) {
      if (ec) return;
      self->deliver(host->session->tick(Clock::now()));
      self->after_call(host);
    });
  }

  void do_accept();

  class HttpConnection;
};

// ---------------------------------------------------------------------------

class Server::Impl::WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(Impl* server, tcp::socket socket)
      : server_(server), ws_(std::move(socket)), id_(++server_->next_conn) {}

  ConnectionId id() const { return id_; }

  void accept(http::request<http::string_body> req) {
    {
      std::lock_guard lock(server_->registry_mutex);
      server_->connections[id_] = weak_from_this();
    }
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.text(true);
    ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

  // Safe from any thread.
  void send(std::string frame) {
    asio::post(ws_.get_executor(), [self = shared_from_this(), frame = std::move(frame)]() mutable {
      self->queue_.push_back(std::move(frame));
      if (self->queue_.size() == 1) self->write_next();
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return closed();
    read_next();
  }

  void read_next() {
    buffer_.clear();
    ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return closed();
    dispatch(beast::buffers_to_string(buffer_.data()));
    read_next();
  }

  void dispatch(std::string frame) {
    std::string target = bound_;
    if (target.empty()) {
      try {
        target = parse_envelope(frame).session;
      } catch (const ProtocolError&) {
        // Framing errors are reported by the session once bound.
      }
    }
    if (target.empty()) return reply_unbound(frame);
    auto host = server_->host_for(target);
    if (!host) {
      return send(serialize(Envelope{MessageKind::Error, target, 0,
                                     {{"code", "unknown_session"}, {"message", "no session '" + target + "'"}}}));
    }
    bound_ = target;
    host_ = host;
    asio::post(host->strand, [server = server_, host, id = id_, frame = std::move(frame)] {
      server->deliver(host->session->handle(id, frame, Clock::now()));
      server->after_call(host);
    });
  }

  // Frames that name no session: a bare Hello is answered, the rest get Error.
  void reply_unbound(const std::string& frame) {
    Envelope reply{MessageKind::Error, "", 0, {{"code", "no_session"}, {"message", "frame must name a session"}}};
    try {
      if (parse_envelope(frame).kind == MessageKind::Hello) {
        reply = Envelope{MessageKind::Hello, "", 0, {{"protocol", kProtocolVersion}}};
      }
    } catch (const ProtocolError& e) {
      reply.payload = {{"code", e.reason()}, {"message", e.what()}};
    }
    send(serialize(reply));
  }

  void write_next() {
    ws_.async_write(asio::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) return self->closed();
                      self->queue_.pop_front();
                      if (!self->queue_.empty()) self->write_next();
                    });
  }

  void closed() {
    if (closed_) return;
    closed_ = true;
    {
      std::lock_guard lock(server_->registry_mutex);
      server_->connections.erase(id_);
    }
    if (auto host = host_) {
      asio::post(host->strand, [server = server_, host, id = id_] {
        server->deliver(host->session->disconnect(id, Clock::now()));
        server->after_call(host);
      });
    }
  }

  Impl* server_;
  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  ConnectionId id_;
  std::string bound_;
  std::shared_ptr<Host> host_;
  bool closed_ = false;
};

void Server::Impl::deliver(const std::vector<Outbound>& out) {
  for (const auto& msg : out) {
    std::shared_ptr<WsConnection> conn;
    {
      std::lock_guard lock(registry_mutex);
      if (auto it = connections.find(msg.to); it != connections.end()) conn = it->second.lock();
    }
    if (conn) conn->send(serialize(msg.message));
  }
}

// ---------------------------------------------------------------------------

class Server::Impl::HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(Impl* server, tcp::socket socket)
      : server_(server), stream_(std::move(socket)) {}

  void start() { read_next(); }

 private:
  void read_next() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      if (req_.target() != "/ws") return respond(http::status::not_found, {{"error", "websocket endpoint is /ws"}});
      stream_.expires_never();
      std::make_shared<WsConnection>(server_, stream_.release_socket())->accept(std::move(req_));
      return;
    }
    route();
  }

  void route() {
    const std::string target(req_.target());
    const auto method = req_.method();
    try {
      if (target == "/sessions" && method == http::verb::post) {
        auto body = nlohmann::json::parse(req_.body(), nullptr, false);
        if (body.is_discarded()) return respond(http::status::bad_request, {{"error", "body is not JSON"}});
        auto session = server_->manager.create(body, Clock::now());
        if (session->state() == SessionState::Over) server_->manager.archive(*session);
        return respond(http::status::created, session->summary());
      }
      if (target == "/sessions" && method == http::verb::get) {
        return respond(http::status::ok, server_->manager.list());
      }
      const std::string prefix = "/sessions/";
      if (target.rfind(prefix, 0) == 0 && method == http::verb::get) {
        std::string rest = target.substr(prefix.size());
        const std::string log_suffix = "/log";
        if (rest.size() > log_suffix.size() && rest.compare(rest.size() - log_suffix.size(), log_suffix.size(), log_suffix) == 0) {
          const auto text = server_->manager.log_text(rest.substr(0, rest.size() - log_suffix.size()));
          if (!text) return respond(http::status::not_found, {{"error", "no such session log"}});
          return respond_text(http::status::ok, *text, "application/x-ndjson");
        }
        if (auto session = server_->manager.find(rest)) return respond(http::status::ok, session->summary());
        return respond(http::status::not_found, {{"error", "no such session"}});
      }
      respond(http::status::not_found, {{"error", "unknown endpoint"}});
    } catch (const GameError& e) {
      respond(http::status::bad_request, {{"error", e.what()}, {"code", to_string(e.code())}});
    } catch (const std::exception& e) {
      respond(http::status::internal_server_error, {{"error", e.what()}});
    }
  }

  void respond(http::status status, const nlohmann::json& body) {
    respond_text(status, body.dump() + "\n", "application/json");
  }

  void respond_text(http::status status, std::string body, const char* content_type) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::server, "trustya");
    res->set(http::field::content_type, content_type);
    res->keep_alive(req_.keep_alive());
    res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (!res->keep_alive()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read_next();
    });
  }

  Impl* server_;
  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

void Server::Impl::do_accept() {
  acceptor.async_accept(asio::make_strand(io), [self = this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<HttpConnection>(self, std::move(socket))->start();
    self->do_accept();
  });
}

// ---------------------------------------------------------------------------

Server::Server(SessionManager& manager, ServerOptions options)
    : impl_(std::make_unique<Impl>(manager, std::move(options))) {}

Server::~Server() { stop(); }

std::uint16_t Server::start() {
  auto& impl = *impl_;
  const tcp::endpoint endpoint(asio::ip::make_address(impl.options.address), impl.options.port);
  impl.acceptor.open(endpoint.protocol());
  impl.acceptor.set_option(asio::socket_base::reuse_address(true));
  impl.acceptor.bind(endpoint);
  impl.acceptor.listen(asio::socket_base::max_listen_connections);
  impl.do_accept();
  return impl.acceptor.local_endpoint().port();
}

void Server::run() { impl_->io.run(); }

void Server::run_in_background() {
  auto& impl = *impl_;
  for (unsigned i = 0; i < std::max(1u, impl.options.threads); ++i) {
    impl.threads.emplace_back([&impl] { impl.io.run(); });
  }
}

void Server::stop() {
  auto& impl = *impl_;
  impl.io.stop();
  for (auto& t : impl.threads) {
    if (t.joinable()) t.join();
  }
  impl.threads.clear();
}

}  // namespace trustya::server
