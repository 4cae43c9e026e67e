// kgserve: HTTP session service over a directory of knowledge graphs.

#include "kg/service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <iostream>

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) {
    g_server->stop();
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph session service"};
  std::string graphs_dir;
  std::string listen = "127.0.0.1:8080";
  std::string snapshot_dir;
  app.add_option("--graphs", graphs_dir, "Directory of .kg.xml files")->required();
  app.add_option("--listen", listen, "HOST:PORT (port 0 picks a free port)");
  app.add_option("--snapshot", snapshot_dir, "Directory for per-session fact logs");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "kgserve: --listen expects HOST:PORT\n";
    return 2;
  }
  const auto host = listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    std::cerr << "kgserve: bad port in '" << listen << "'\n";
    return 2;
  }

  kg::GraphRegistry graphs;
  try {
    graphs = kg::load_graph_directory(graphs_dir);
  } catch (const std::exception& e) {
    std::cerr << "kgserve: " << e.what() << '\n';
    return 1;
  }
  std::optional<std::filesystem::path> snapshot;
  if (!snapshot_dir.empty()) {
    snapshot = snapshot_dir;
  }
  kg::SessionService service(std::move(graphs), snapshot);

  httplib::Server server;
  kg::mount_routes(server, service);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  if (port == 0) {
    port = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    port = -1;
  }
  if (port < 0) {
    std::cerr << "kgserve: cannot listen on " << listen << '\n';
    return 1;
  }
  std::cout << "kgserve: listening on " << host << ':' << port << std::endl;
  server.listen_after_bind();
  return 0;
}
