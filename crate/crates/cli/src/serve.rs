//! Live service for the web console.
//!
//! One thread owns the [`Session`] and runs it paced to the wall clock.
//! Observed pose frames go out as NDJSON lines on the telemetry port and as
//! WebSocket text messages; every tick's thrust frames go out as raw 5-byte
//! frames on the command port, as a radio bridge would send them.
//! WebSocket clients send `ConsoleCommand` JSON and get one `Ack` each.

use std::io::ErrorKind;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use anyhow::Context;
use log::{debug, info, warn};
use micromvp::netlink::transport::Broadcaster;
use micromvp::netlink::{encode_pose_frame, encode_thrust_frame, Ack, CommandKind, ConsoleCommand};
use micromvp::orchestrator::{ScenarioConfig, Session};
use serde_json::Value;
use tungstenite::{Message, WebSocket};

pub struct ServeOptions {
    pub config: ScenarioConfig,
    pub host: String,
    pub telemetry_port: u16,
    pub command_port: u16,
    pub ws_port: u16,
}

type Request = (ConsoleCommand, Sender<Ack>);
type Subscribers = Arc<Mutex<Vec<Sender<String>>>>;

const ACK_TIMEOUT: Duration = Duration::from_secs(2);
const POLL: Duration = Duration::from_millis(5);

pub struct Server {
    pub telemetry_addr: SocketAddr,
    pub thrust_addr: SocketAddr,
    pub ws_addr: SocketAddr,
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl Server {
    pub fn start(opts: ServeOptions) -> anyhow::Result<Self> {
        let session = Session::new(opts.config.clone())?;
        let telemetry = Broadcaster::bind(&format!("{}:{}", opts.host, opts.telemetry_port)).context("telemetry port")?;
        let thrust = Broadcaster::bind(&format!("{}:{}", opts.host, opts.command_port)).context("command port")?;
        let listener = TcpListener::bind((opts.host.as_str(), opts.ws_port)).context("websocket port")?;
        listener.set_nonblocking(true)?;
        let ws_addr = listener.local_addr()?;
        let (telemetry_addr, thrust_addr) = (telemetry.local_addr(), thrust.local_addr());
        info!("telemetry on {telemetry_addr}, thrust frames on {thrust_addr}, console on ws://{ws_addr}");

        let stop = Arc::new(AtomicBool::new(false));
        let subscribers: Subscribers = Arc::default();
        let (requests, inbox) = mpsc::channel::<Request>();

        let control = ControlLoop {
            base: opts.config,
            session,
            telemetry,
            thrust,
            subscribers: subscribers.clone(),
            inbox,
            stop: stop.clone(),
        };
        let mut threads = vec![std::thread::spawn(move || control.run())];
        {
            let stop = stop.clone();
            threads.push(std::thread::spawn(move || accept_clients(listener, requests, subscribers, stop)));
        }
        Ok(Self {
            telemetry_addr,
            thrust_addr,
            ws_addr,
            stop,
            threads,
        })
    }

    /// Blocks until the service stops.
    pub fn wait(mut self) {
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }

    pub fn shutdown(self) {
        self.stop.store(true, Ordering::Relaxed);
        self.wait();
    }
}

struct ControlLoop {
    base: ScenarioConfig,
    session: Session,
    telemetry: Broadcaster,
    thrust: Broadcaster,
    subscribers: Subscribers,
    inbox: Receiver<Request>,
    stop: Arc<AtomicBool>,
}

impl ControlLoop {
    fn run(mut self) {
        let mut next = Instant::now();
        let mut last_published = f64::NEG_INFINITY;
        while !self.stop.load(Ordering::Relaxed) {
            while let Ok((cmd, reply)) = self.inbox.try_recv() {
                let ack = self.handle(&cmd);
                let _ = reply.send(ack);
            }
            match self.session.step() {
                Ok(record) => {
                    let bytes: Vec<u8> = record.thrusts.iter().flat_map(encode_thrust_frame).collect();
                    self.thrust.send(&bytes);
                }
                Err(e) => warn!("tick failed: {e}"),
            }
            let frame = self.session.last_frame();
            if frame.t > last_published {
                last_published = frame.t;
                let line = encode_pose_frame(frame);
                self.telemetry.send(line.as_bytes());
                self.subscribers.lock().unwrap().retain(|s| s.send(line.clone()).is_ok());
            }

            next += Duration::from_secs_f64(self.session.config().tick_dt());
            let now = Instant::now();
            match next.checked_duration_since(now) {
                Some(wait) => std::thread::sleep(wait),
                None if now - next > Duration::from_millis(100) => {
                    debug!("control loop fell behind by {:?}", now - next);
                    next = now;
                }
                None => {}
            }
        }
    }

    fn handle(&mut self, cmd: &ConsoleCommand) -> Ack {
        if cmd.kind != CommandKind::StartScenario {
            return self.session.apply_command(cmd);
        }
        if let Err(reason) = cmd.validate(&self.session.config().arena, self.session.ids()) {
            return Ack::rejected(Some(cmd.kind), reason);
        }
        let mut patch = match &cmd.params {
            Some(Value::Object(m)) => Value::Object(m.clone()),
            None => Value::Object(Default::default()),
            Some(_) => return Ack::rejected(Some(cmd.kind), "params must be an object"),
        };
        patch["scenario"] = Value::String(cmd.scenario.clone().expect("validated"));
        let started = self
            .base
            .with_overrides(&patch)
            .map_err(|e| e.to_string())
            .and_then(|cfg| Session::new(cfg).map_err(|e| e.to_string()));
        match started {
            Ok(session) => {
                info!("started {} with {} vehicles", session.config().scenario, session.ids().len());
                self.session = session;
                let mut ack = Ack::accepted(cmd.kind);
                ack.grid = self.session.grid().map(|g| g.vertices().iter().map(|v| [v.x, v.y]).collect());
                ack
            }
            Err(reason) => Ack::rejected(Some(cmd.kind), reason),
        }
    }
}

fn accept_clients(listener: TcpListener, requests: Sender<Request>, subscribers: Subscribers, stop: Arc<AtomicBool>) {
    let mut clients = Vec::new();
    while !stop.load(Ordering::Relaxed) {
        match listener.accept() {
            Ok((stream, peer)) => {
                info!("console connected from {peer}");
                let (requests, subscribers, stop) = (requests.clone(), subscribers.clone(), stop.clone());
                clients.push(std::thread::spawn(move || {
                    if let Err(e) = serve_client(stream, requests, subscribers, stop) {
                        debug!("console {peer}: {e}");
                    }
                    info!("console {peer} disconnected");
                }));
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => std::thread::sleep(POLL),
            Err(e) => {
                warn!("accept failed: {e}");
                std::thread::sleep(Duration::from_millis(50));
            }
        }
    }
    for c in clients {
        let _ = c.join();
    }
}

fn serve_client(stream: TcpStream, requests: Sender<Request>, subscribers: Subscribers, stop: Arc<AtomicBool>) -> anyhow::Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    let mut ws = tungstenite::accept(stream).map_err(|e| anyhow::anyhow!("handshake: {e}"))?;
    // Short read timeout so the same thread can also forward telemetry.
    ws.get_ref().set_read_timeout(Some(POLL))?;
    let (tx, lines) = mpsc::channel();
    subscribers.lock().unwrap().push(tx);
    while !stop.load(Ordering::Relaxed) {
        match ws.read() {
            Ok(Message::Text(text)) => {
                let ack = answer(&text, &requests);
                ws.send(Message::text(ack.to_json()))?;
            }
            Ok(Message::Close(_)) => break,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e)) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => break,
            Err(e) => return Err(e.into()),
        }
        forward(&mut ws, &lines)?;
    }
    let _ = ws.close(None);
    Ok(())
}

fn forward(ws: &mut WebSocket<TcpStream>, lines: &Receiver<String>) -> anyhow::Result<()> {
    let mut any = false;
    for line in lines.try_iter() {
        ws.write(Message::text(line))?;
        any = true;
    }
    if any {
        ws.flush()?;
    }
    Ok(())
}

fn answer(text: &str, requests: &Sender<Request>) -> Ack {
    let cmd = match ConsoleCommand::parse(text) {
        Ok(c) => c,
        Err(reason) => return Ack::rejected(None, reason),
    };
    let (reply, ack) = mpsc::channel();
    if requests.send((cmd.clone(), reply)).is_err() {
        return Ack::rejected(Some(cmd.kind), "service is shutting down");
    }
    ack.recv_timeout(ACK_TIMEOUT)
        .unwrap_or_else(|_| Ack::rejected(Some(cmd.kind), "no reply from the control loop"))
}
