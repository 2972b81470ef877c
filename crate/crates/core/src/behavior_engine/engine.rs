use super::tracker::{HeadAim, TrackNote, Tracker};
use super::{
    stream_rng, streams, ActionExecution, BlinkCause, BlinkSchedule, Condition, ElementSpan, EngineConfig, Event,
    EventLog, ExecPhase, HeadSample, LaserSample, Phase, Presentation, RunError, RunOptions, RunOutcome,
    StateRecord, TourState,
};
use crate::geometry::{circular_path, laser_reachable, pan_tilt_ik, visitor_from_costmap_diff, Vec3};
use crate::tour_model::{validate_against_world, validate_plan, ActionKind, ActionSpec, NavPoint, TourPlan, World};
use crate::world_sim::{
    dock_pose, visitor_spot, Candidate, GazeSample, PanTilt, Registry, RobotCommand, VisitorConfig,
    VisitorGazeModel, WorldModel,
};
use rand_chacha::ChaCha8Rng;

fn us(s: f64) -> u64 {
    (s * 1e6).round() as u64
}

fn secs(t: u64) -> f64 {
    t as f64 / 1e6
}

struct LaserRun {
    exhibit: String,
    center: Vec3,
    pending: Option<Vec3>,
    rev: u32,
    revs: u32,
    period_us: u64,
    next_rev_us: Option<u64>,
    samples: Vec<(u64, PanTilt)>,
}

enum SlotKind {
    Plain,
    Look { exhibit: String, aim: PanTilt },
    Laser(Box<LaserRun>),
    Track,
}

struct Slot {
    exec: usize,
    end_us: Option<u64>,
    done: bool,
    kind: SlotKind,
}

struct Active {
    pos: usize,
    start_us: u64,
    slots: Vec<Slot>,
}

struct TrackRun {
    exec: usize,
    tracker: Tracker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Waiting,
    Navigating { pos: usize, since: u64 },
    Introducing,
    Done,
}

struct Engine<'a> {
    plan: &'a TourPlan,
    cond: Condition,
    cfg: EngineConfig,
    vcfg: VisitorConfig,
    world: WorldModel,
    registry: Registry,
    blink: BlinkSchedule,
    sensors: ChaCha8Rng,
    visitor: VisitorGazeModel,

    tick_us: u64,
    gaze_us: u64,
    next_control: u64,
    next_gaze: u64,
    dispatch_at: Option<(u64, usize)>,
    mode: Mode,
    active: Option<Active>,
    track: Option<TrackRun>,
    cmd: RobotCommand,
    presenting: Option<String>,
    /// Index of the element being introduced, for event tagging.
    element: Option<u32>,

    log: EventLog,
    gaze: Vec<GazeSample>,
    laser: Vec<LaserSample>,
    head: Vec<HeadSample>,
}

/// Executes `plan` in the simulated gallery described by `world`.
pub fn run_tour(
    plan: &TourPlan,
    world: &World,
    condition: Condition,
    seed: u64,
    opts: RunOptions,
) -> Result<RunOutcome, RunError> {
    validate_plan(plan).map_err(|e| RunError::Plan(e.to_string()))?;
    validate_against_world(plan, world).map_err(|e| RunError::Plan(e.to_string()))?;

    let mut wm = WorldModel::new(world, opts.sim.clone())?;
    let first_nav = nav_of(&wm, &plan.elements[0].nav_point);
    wm.place_robot(opts.start.unwrap_or_else(|| dock_pose(first_nav, &wm.config)));
    let spot = visitor_spot(&first_nav, &opts.visitor);
    wm.place_visitor(spot.0, spot.1);
    wm.visitor.speed = opts.visitor.walk_speed;

    let tick_us = us(wm.config.tick_s).max(1);
    let gaze_us = us(1.0 / wm.config.gaze_rate_hz).max(1);
    let visitor = VisitorGazeModel::new(opts.visitor.clone(), wm.wall_extent, stream_rng(seed, streams::VISITOR));
    let mut engine = Engine {
        plan,
        cond: condition,
        blink: BlinkSchedule::new(opts.engine.blink.clone(), stream_rng(seed, streams::BLINK)),
        sensors: stream_rng(seed, streams::SENSORS),
        visitor,
        cfg: opts.engine,
        vcfg: opts.visitor,
        world: wm,
        registry: opts.registry,
        tick_us,
        gaze_us,
        next_control: tick_us,
        next_gaze: 0,
        dispatch_at: Some((0, 0)),
        mode: Mode::Waiting,
        active: None,
        track: None,
        cmd: RobotCommand::default(),
        presenting: None,
        element: None,
        log: EventLog {
            tour_id: plan.tour_id.clone(),
            condition,
            seed,
            events: Vec::new(),
            presentations: Vec::new(),
            states: Vec::new(),
            elements: Vec::new(),
            executions: Vec::new(),
        },
        gaze: Vec::new(),
        laser: Vec::new(),
        head: Vec::new(),
    };
    engine.state(0, TourState::Idle);
    match engine.run() {
        Ok(()) => Ok(engine.finish(false)),
        Err((nav_point, t)) => Err(RunError::Unreachable {
            nav_point,
            t: secs(t),
            partial: Box::new(engine.finish(true)),
        }),
    }
}

fn nav_of(world: &WorldModel, id: &str) -> NavPoint {
    world.exhibit(id).expect("plan validated against world").nav_point
}

type Abort = (String, u64);

impl Engine<'_> {
    fn run(&mut self) -> Result<(), Abort> {
        let max = us(self.cfg.max_duration);
        loop {
            let t = self.next_time();
            if t > max {
                let nav = self.active_nav().unwrap_or_default();
                return Err((nav, t));
            }
            self.process_actions(t);
            self.check_element(t);
            if let Some((at, pos)) = self.dispatch_at {
                if at == t {
                    self.dispatch_at = None;
                    self.dispatch(t, pos)?;
                    self.check_element(t);
                }
            }
            if self.blink.next_due() <= t {
                for b in self.blink.tick(t, false) {
                    self.fire_blink(b.t_us);
                }
            }
            if self.next_control == t {
                self.control_tick(t)?;
                self.next_control += self.tick_us;
            }
            if self.next_gaze == t {
                self.gaze_tick(t);
                self.next_gaze += self.gaze_us;
            }
            if self.mode == Mode::Done {
                return Ok(());
            }
        }
    }

    fn active_nav(&self) -> Option<String> {
        match self.mode {
            Mode::Navigating { pos, .. } => Some(self.plan.elements[pos].nav_point.clone()),
            _ => None,
        }
    }

    fn next_time(&self) -> u64 {
        let mut t = self.next_control.min(self.next_gaze).min(self.blink.next_due());
        if let Some((at, _)) = self.dispatch_at {
            t = t.min(at);
        }
        if let Some(a) = &self.active {
            for s in a.slots.iter().filter(|s| !s.done) {
                if let Some(e) = s.end_us {
                    t = t.min(e);
                }
                if let SlotKind::Laser(l) = &s.kind {
                    if let Some(r) = l.next_rev_us {
                        t = t.min(r);
                    }
                }
            }
        }
        t
    }

    fn event(&mut self, t: u64, kind: ActionKind, exhibit: Option<&str>, phase: Phase) {
        let element = self.element;
        self.log.events.push(Event {
            t: secs(t),
            element,
            kind,
            exhibit: exhibit.map(str::to_string),
            phase,
        });
    }

    fn state(&mut self, t: u64, state: TourState) {
        self.log.states.push(StateRecord { t: secs(t), state });
    }

    fn fire_blink(&mut self, t: u64) {
        self.event(t, ActionKind::BlinkEye, None, Phase::Fire);
    }

    fn open_exec(&mut self, t: u64, action: &ActionSpec, element: u32) -> usize {
        self.log.executions.push(ActionExecution {
            action: action.clone(),
            element,
            last_element: element,
            phase: ExecPhase::Running,
            start: secs(t),
            end: secs(t),
            reason: None,
        });
        self.event(t, action.kind(), action.exhibit_id(), Phase::Start);
        self.log.executions.len() - 1
    }

    fn close_exec(&mut self, t: u64, exec: usize, phase: ExecPhase, reason: Option<String>) {
        let (kind, exhibit) = {
            let x = &mut self.log.executions[exec];
            x.phase = phase;
            x.end = secs(t);
            x.reason = reason;
            (x.action.kind(), x.action.exhibit_id().map(str::to_string))
        };
        let p = if phase == ExecPhase::Aborted { Phase::Abort } else { Phase::Complete };
        self.event(t, kind, exhibit.as_deref(), p);
    }

    /// Where a deictic action aims: the registered coordinate, else the
    /// pre-annotated world center.
    fn exhibit_point(&self, id: &str) -> Vec3 {
        self.registry
            .get(id)
            .unwrap_or_else(|| Vec3::from(self.world.exhibit(id).expect("validated").center))
    }

    fn at_nav(&self, nav: &NavPoint) -> bool {
        let p = &self.world.robot.pose;
        (p.x - nav.x).abs() < 1e-6
            && (p.y - nav.y).abs() < 1e-6
            && crate::geometry::wrap_angle(p.theta - nav.heading).abs() < 1e-6
            && self.world.robot.is_idle()
    }

    fn dispatch(&mut self, t: u64, pos: usize) -> Result<(), Abort> {
        let el = &self.plan.elements[pos];
        let nav = nav_of(&self.world, &el.nav_point);
        if !self.at_nav(&nav) {
            if self.world.plan_route(nav).is_err() {
                return Err((el.nav_point.clone(), t));
            }
            self.state(t, TourState::Navigating(el.nav_point.clone()));
            let spot = visitor_spot(&nav, &self.vcfg);
            self.world.visitor.walk_target = Some(spot);
            self.visitor.follow_robot(secs(t));
            self.mode = Mode::Navigating { pos, since: t };
            return Ok(());
        }
        self.start_element(t, pos);
        Ok(())
    }

    fn start_element(&mut self, t: u64, pos: usize) {
        let plan = self.plan;
        let el = &plan.elements[pos];
        self.mode = Mode::Introducing;
        self.element = Some(el.index);
        self.state(t, TourState::Introducing(el.index));
        self.active = Some(Active {
            pos,
            start_us: t,
            slots: Vec::new(),
        });
        let mut slots = Vec::new();
        for action in &el.actions {
            let kind = action.kind();
            if self.cond == Condition::AudioOnly && kind.is_embodied() {
                self.event(t, kind, action.exhibit_id(), Phase::Suppressed);
                continue;
            }
            match action {
                ActionSpec::PlayAudio { duration_s, .. } => {
                    let exec = self.open_exec(t, action, el.index);
                    for b in self.blink.tick(t, true) {
                        debug_assert_eq!(b.cause, BlinkCause::Speech);
                        self.fire_blink(b.t_us);
                    }
                    slots.push(Slot {
                        exec,
                        end_us: Some(t + us(*duration_s)),
                        done: false,
                        kind: SlotKind::Plain,
                    });
                }
                ActionSpec::BlinkEye {} => {
                    let exec = self.open_exec(t, action, el.index);
                    for b in self.blink.tick(t, true) {
                        self.fire_blink(b.t_us);
                    }
                    slots.push(Slot {
                        exec,
                        end_us: Some(t),
                        done: false,
                        kind: SlotKind::Plain,
                    });
                }
                ActionSpec::TrackVisitor {} => {
                    let exec = match &self.track {
                        Some(run) => run.exec,
                        None => {
                            let exec = self.open_exec(t, action, el.index);
                            self.track = Some(TrackRun {
                                exec,
                                tracker: Tracker::new(self.cfg.kalman, self.cfg.fallback_timeout, t),
                            });
                            exec
                        }
                    };
                    self.log.executions[exec].last_element = el.index;
                    slots.push(Slot {
                        exec,
                        end_us: None,
                        done: false,
                        kind: SlotKind::Track,
                    });
                }
                ActionSpec::LookAtExhibit { exhibit_id, .. } => {
                    let exec = self.open_exec(t, action, el.index);
                    let geom = &self.world.config.robot;
                    let local = geom.in_head_frame(&self.world.robot.pose, self.exhibit_point(exhibit_id));
                    let aim = pan_tilt_ik(local, &geom.head_limits)
                        .map(|a| PanTilt::new(a.yaw, a.pitch))
                        .unwrap_or_default();
                    let head = self.world.robot.head;
                    let slew = (aim.yaw - head.yaw).abs().max((aim.pitch - head.pitch).abs()) / self.world.config.slew_rate;
                    let slew_ticks = (us(slew) as f64 / self.tick_us as f64).ceil() as u64;
                    let dur = slew_ticks * self.tick_us + us(self.cfg.look_detection_latency);
                    slots.push(Slot {
                        exec,
                        end_us: Some(t + dur),
                        done: false,
                        kind: SlotKind::Look {
                            exhibit: exhibit_id.clone(),
                            aim,
                        },
                    });
                }
                ActionSpec::PointLaser { exhibit_id, revolutions } => {
                    let exec = self.open_exec(t, action, el.index);
                    let center = self.exhibit_point(exhibit_id);
                    let geom = &self.world.config.robot;
                    if !laser_reachable(center, &self.world.robot.pose, geom) {
                        self.close_exec(
                            t,
                            exec,
                            ExecPhase::Aborted,
                            Some(format!("exhibit '{exhibit_id}' lies in the laser's blocked sector")),
                        );
                        continue;
                    }
                    let period_us = us(self.cfg.laser_sec_per_rev);
                    let mut run = LaserRun {
                        exhibit: exhibit_id.clone(),
                        center,
                        pending: None,
                        rev: 0,
                        revs: *revolutions,
                        period_us,
                        next_rev_us: Some(t),
                        samples: Vec::new(),
                    };
                    self.laser_revolution(t, el.index, &mut run);
                    slots.push(Slot {
                        exec,
                        end_us: Some(t + period_us * *revolutions as u64),
                        done: false,
                        kind: SlotKind::Laser(Box::new(run)),
                    });
                }
            }
        }

        // Visitor attention.
        let ts = secs(t);
        match &el.exhibit {
            None => self.visitor.follow_robot(ts),
            Some(e) => {
                let cued = slots.iter().any(|s| match &s.kind {
                    SlotKind::Look { exhibit, .. } => exhibit == e,
                    SlotKind::Laser(l) => &l.exhibit == e,
                    _ => false,
                });
                let target = self.candidate(e);
                if cued {
                    self.visitor.cue(ts, &target);
                } else if self.presenting.as_deref() != Some(e.as_str()) {
                    let nav = nav_of(&self.world, &el.nav_point);
                    let cands: Vec<Candidate> = self
                        .world
                        .exhibits
                        .iter()
                        .filter(|x| x.nav_point == nav)
                        .map(|x| x.id.clone())
                        .collect::<Vec<_>>()
                        .iter()
                        .map(|id| self.candidate(id))
                        .collect();
                    self.visitor.search(ts, &target, &cands);
                }
            }
        }
        self.presenting = el.exhibit.clone();
        self.visitor.set_tracking(self.track.is_some());
        self.active.as_mut().expect("just set").slots = slots;
    }

    fn candidate(&self, id: &str) -> Candidate {
        let e = self.world.exhibit(id).expect("validated");
        let b = self.world.exhibit_box(e);
        Candidate {
            id: e.id.clone(),
            center: b.center(),
            label: e.label_box.map(|l| l.center()),
            area: e.area(),
        }
    }

    /// Starts the next laser revolution at `t`, switching to a pending
    /// detected center first.
    fn laser_revolution(&mut self, t: u64, element: u32, run: &mut LaserRun) {
        if let Some(c) = run.pending.take() {
            run.center = c;
            let id = run.exhibit.clone();
            self.event(t, ActionKind::PointLaser, Some(&id), Phase::Handoff);
        }
        let e = self.world.exhibit(&run.exhibit).expect("validated");
        let radius = self.cfg.laser_radius_factor * e.width.min(e.height);
        let n = self.cfg.laser_samples_per_rev.max(3);
        let geom = &self.world.config.robot;
        let pose = self.world.robot.pose;
        run.samples.clear();
        for (j, p) in circular_path(run.center, self.world.wall.normal, radius, n, 1).into_iter().enumerate() {
            let ts = t + (run.period_us as f64 * j as f64 / n as f64).round() as u64;
            let a = pan_tilt_ik(geom.in_laser_frame(&pose, p), &geom.laser_limits)
                .map(|a| PanTilt::new(a.yaw, a.pitch))
                .unwrap_or_default();
            run.samples.push((ts, a));
            self.laser.push(LaserSample {
                t: secs(ts),
                element,
                exhibit: run.exhibit.clone(),
                rev: run.rev,
                point: [p.x, p.y, p.z],
                yaw: a.yaw,
                pitch: a.pitch,
            });
        }
        run.rev += 1;
        run.next_rev_us = (run.rev < run.revs).then(|| t + run.period_us);
    }

    fn process_actions(&mut self, t: u64) {
        let Some(mut active) = self.active.take() else { return };
        let element = self.plan.elements[active.pos].index;
        // Non-laser ends first, so a detection landing on a revolution
        // boundary is used by that revolution.
        for i in 0..active.slots.len() {
            let slot = &active.slots[i];
            if slot.done || slot.end_us != Some(t) || matches!(slot.kind, SlotKind::Laser(_)) {
                continue;
            }
            let exec = slot.exec;
            let mut reason = None;
            if let SlotKind::Look { exhibit, aim } = &slot.kind {
                let exhibit = exhibit.clone();
                let pose = self.world.robot.pose;
                let found = self
                    .world
                    .detect_from(&pose, *aim, &exhibit, &mut self.sensors)
                    .and_then(|(d, _, _)| d.centroid);
                match found {
                    Some(c) => {
                        self.registry.insert(&exhibit, c);
                        for s in active.slots.iter_mut().filter(|s| !s.done) {
                            if let SlotKind::Laser(l) = &mut s.kind {
                                if l.exhibit == exhibit {
                                    l.pending = Some(c);
                                }
                            }
                        }
                    }
                    None => reason = Some(format!("exhibit '{exhibit}' not detected")),
                }
            }
            active.slots[i].done = true;
            self.close_exec(t, exec, ExecPhase::Completed, reason);
        }
        for slot in active.slots.iter_mut().filter(|s| !s.done) {
            let SlotKind::Laser(run) = &mut slot.kind else { continue };
            if run.next_rev_us == Some(t) {
                self.laser_revolution(t, element, run);
            }
            if slot.end_us == Some(t) {
                slot.done = true;
                self.close_exec(t, slot.exec, ExecPhase::Completed, None);
            }
        }
        self.active = Some(active);
    }

    fn check_element(&mut self, t: u64) {
        let Some(active) = &self.active else { return };
        if self.mode != Mode::Introducing || active.slots.iter().any(|s| !s.done && s.end_us.is_some()) {
            return;
        }
        let pos = active.pos;
        let start = active.start_us;
        let el = &self.plan.elements[pos];
        let mut kinds: Vec<ActionKind> = active
            .slots
            .iter()
            .map(|s| self.log.executions[s.exec].action.kind())
            .collect();
        kinds.dedup();
        self.log.elements.push(ElementSpan {
            index: el.index,
            t_start: secs(start),
            t_end: secs(t),
            exhibit: el.exhibit.clone(),
            actions: kinds,
        });

        let next = self.plan.elements.get(pos + 1);
        let keep_tracking = self.cond == Condition::Full && next.is_some_and(|n| n.has(ActionKind::TrackVisitor));
        if !keep_tracking {
            if let Some(run) = self.track.take() {
                self.close_exec(t, run.exec, ExecPhase::Completed, None);
                self.visitor.set_tracking(false);
            }
        }
        self.active = None;
        self.element = None;
        match next {
            Some(_) => {
                self.dispatch_at = Some((t + us(self.cfg.dispatch_gap).max(1), pos + 1));
                self.mode = Mode::Waiting;
            }
            None => {
                self.state(t, TourState::Done);
                self.mode = Mode::Done;
            }
        }
    }

    fn control_tick(&mut self, t: u64) -> Result<(), Abort> {
        let dt = secs(self.tick_us);
        self.world.step(&self.cmd, dt);
        self.world.visitor.face_visible = !self.vcfg.face_hidden(secs(t));

        let mut head = None;
        let mut laser = None;
        let mut look = false;
        if let Some(a) = &self.active {
            for s in a.slots.iter().filter(|s| !s.done) {
                match &s.kind {
                    SlotKind::Look { aim, .. } => {
                        head = Some(*aim);
                        look = true;
                    }
                    SlotKind::Laser(run) => {
                        laser = run.samples.iter().rev().find(|(ts, _)| *ts <= t).map(|(_, a)| *a);
                    }
                    _ => {}
                }
            }
        }
        if !look {
            if let Some(mut run) = self.track.take() {
                let camera = self.world.head_camera();
                let face = self.world.sense_face(&camera, &mut self.sensors);
                let hint = if run.tracker.track().is_none() && face.is_none() {
                    visitor_from_costmap_diff(&self.world.static_grid, &self.world.live_grid())
                        .ok()
                        .flatten()
                } else {
                    None
                };
                let out = run.tracker.tick(t, face, hint);
                match out.note {
                    Some(TrackNote::Fallback) => self.event(t, ActionKind::TrackVisitor, None, Phase::Fallback),
                    Some(TrackNote::Resume) => self.event(t, ActionKind::TrackVisitor, None, Phase::Resume),
                    None => {}
                }
                let geom = &self.world.config.robot;
                head = match out.aim {
                    HeadAim::At(p) => pan_tilt_ik(geom.in_head_frame(&self.world.robot.pose, p), &geom.head_limits)
                        .ok()
                        .map(|a| PanTilt::new(a.yaw, a.pitch)),
                    HeadAim::Forward => Some(PanTilt::default()),
                    HeadAim::Hold => None,
                };
                if let Some(h) = head {
                    self.head.push(HeadSample {
                        t: secs(t),
                        yaw: h.yaw,
                        pitch: h.pitch,
                        phase: out.phase,
                    });
                }
                self.track = Some(run);
            }
        }
        self.cmd = RobotCommand { head, laser };

        if let Mode::Navigating { pos, since } = self.mode {
            if self.world.robot.is_idle() {
                self.mode = Mode::Waiting;
                self.dispatch_at = Some((t + us(self.cfg.dispatch_gap).max(1), pos));
            } else if t - since > us(self.cfg.nav_timeout) {
                return Err((self.plan.elements[pos].nav_point.clone(), t));
            }
        }
        Ok(())
    }

    fn gaze_tick(&mut self, t: u64) {
        self.gaze.push(self.visitor.sample(secs(t)));
    }

    fn finish(mut self, aborted: bool) -> RunOutcome {
        let mut presentations: Vec<Presentation> = Vec::new();
        let mut prev: Option<&ElementSpan> = None;
        for span in &self.log.elements {
            if let Some(e) = &span.exhibit {
                let extends = prev.is_some_and(|p| p.exhibit.as_ref() == Some(e));
                match presentations.last_mut() {
                    Some(last) if extends => last.t_end = span.t_end,
                    _ => presentations.push(Presentation {
                        exhibit: e.clone(),
                        t_start: span.t_start,
                        t_end: span.t_end,
                    }),
                }
            }
            prev = Some(span);
        }
        self.log.presentations = presentations;
        RunOutcome {
            log: self.log,
            gaze: self.gaze,
            laser: self.laser,
            head: self.head,
            registry: self.registry,
            aborted,
        }
    }
}
