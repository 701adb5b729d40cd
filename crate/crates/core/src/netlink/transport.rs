//! Stream-socket bindings. A [`Broadcaster`] accepts any number of TCP
//! clients and writes every message to all of them; clients that fail a
//! write are dropped. Telemetry uses it for NDJSON lines and the radio
//! bridge for raw thrust frames.

use std::io::Write;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use super::NetError;

pub const DEFAULT_TELEMETRY_PORT: u16 = 5590;
pub const DEFAULT_COMMAND_PORT: u16 = 5591;

pub struct Broadcaster {
    addr: SocketAddr,
    clients: Arc<Mutex<Vec<TcpStream>>>,
    stop: Arc<AtomicBool>,
    acceptor: Option<JoinHandle<()>>,
}

impl Broadcaster {
    /// Binds `addr` (port 0 picks a free port) and starts accepting.
    pub fn bind(addr: &str) -> Result<Self, NetError> {
        let listener = TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let clients: Arc<Mutex<Vec<TcpStream>>> = Arc::default();
        let stop = Arc::new(AtomicBool::new(false));
        let acceptor = {
            let clients = clients.clone();
            let stop = stop.clone();
            std::thread::spawn(move || {
                while !stop.load(Ordering::Relaxed) {
                    match listener.accept() {
                        Ok((stream, peer)) => {
                            log::info!("client connected from {peer}");
                            let _ = stream.set_nodelay(true);
                            let _ = stream.set_nonblocking(false);
                            let _ = stream.set_write_timeout(Some(Duration::from_millis(200)));
                            clients.lock().unwrap().push(stream);
                        }
                        Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                            std::thread::sleep(Duration::from_millis(5));
                        }
                        Err(e) => {
                            log::warn!("accept failed: {e}");
                            std::thread::sleep(Duration::from_millis(50));
                        }
                    }
                }
            })
        };
        Ok(Self {
            addr,
            clients,
            stop,
            acceptor: Some(acceptor),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn client_count(&self) -> usize {
        self.clients.lock().unwrap().len()
    }

    /// Writes `bytes` to every client. Returns how many received it.
    pub fn send(&self, bytes: &[u8]) -> usize {
        let mut clients = self.clients.lock().unwrap();
        clients.retain_mut(|c| c.write_all(bytes).is_ok());
        clients.len()
    }
}

impl Drop for Broadcaster {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.acceptor.take() {
            let _ = h.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader};
    use std::time::Instant;

    #[test]
    fn loopback_lines() {
        let b = Broadcaster::bind("127.0.0.1:0").unwrap();
        let stream = TcpStream::connect(b.local_addr()).unwrap();
        let deadline = Instant::now() + Duration::from_secs(5);
        while b.client_count() == 0 {
            assert!(Instant::now() < deadline, "client never registered");
            std::thread::sleep(Duration::from_millis(2));
        }
        assert_eq!(b.send(b"{\"t\":0,\"poses\":[]}\n"), 1);
        let mut line = String::new();
        BufReader::new(stream).read_line(&mut line).unwrap();
        assert_eq!(line, "{\"t\":0,\"poses\":[]}\n");
    }
}
