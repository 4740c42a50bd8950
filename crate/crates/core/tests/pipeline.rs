use std::fs;

use navlab::harness::eval::{compare, evaluate, write_evaluations, Planner, TrialMetrics};
use navlab::harness::train::{train, CHECKPOINT_FILE};
use navlab::harness::trajectory::{read_log, replay};
use navlab::harness::{PlannerKind, ScenarioFile, Termination};
use navlab::world::{step_kinematics, RobotState, VelocityCommand};

fn quick_scenario() -> ScenarioFile {
    let mut s = ScenarioFile::builtin("arena_10x15").unwrap();
    s.training.max_steps = 80;
    s.td3.hidden = vec![32, 32];
    s.td3.batch_size = 32;
    s
}

#[test]
fn train_eval_replay_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = quick_scenario();
    train(&s, 5, 3, dir.path()).unwrap();

    let ckpt = dir.path().join(CHECKPOINT_FILE);
    let planner = Planner::load(PlannerKind::Td3Dwa, Some(&ckpt), &s).unwrap();
    let e = evaluate(&planner, &s, 4, 9).unwrap();
    write_evaluations(std::slice::from_ref(&e), dir.path(), "metrics.csv").unwrap();

    let m = &e.metrics;
    assert_eq!(m.successes + m.collisions + m.timeouts, m.trials);

    let log_path = dir.path().join("logs/td3-dwa_trial_0000.json");
    let out = dir.path().join("trajectory.csv");
    let log = replay(&log_path, &out).unwrap();
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,x,y,theta,v,omega,min_scan,source");
    assert_eq!(lines.len(), 1 + e.trials[0].steps + 1);
    assert_eq!(log.rows.len(), e.trials[0].steps + 1);
}

#[test]
fn logged_poses_reintegrate_from_logged_velocities() {
    let s = quick_scenario();
    let e = evaluate(&Planner::Dwa, &s, 3, 1).unwrap();
    for log in &e.logs {
        let mut state = RobotState::at_rest(log.rows[0].x, log.rows[0].y, log.rows[0].theta);
        for row in &log.rows[1..] {
            state = step_kinematics(&state, &VelocityCommand::new(row.v, row.omega), log.dt).unwrap();
            assert!((state.x - row.x).abs() < 1e-9 && (state.y - row.y).abs() < 1e-9);
        }
    }
}

#[test]
fn comparing_a_planner_with_itself_gives_identical_rows() {
    let dir = tempfile::tempdir().unwrap();
    let s = quick_scenario();
    let evals = compare(&[Planner::Dwa, Planner::Dwa], &s, 3, 2).unwrap();
    assert_eq!(evals[0].metrics, evals[1].metrics);
    write_evaluations(&evals, dir.path(), "compare.csv").unwrap();

    let text = fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        lines[0],
        "planner,collisions,trials,avg_time_s,avg_path_length_m,successes,timeouts"
    );
    assert_eq!(lines[1], lines[2]);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<TrialMetrics> = rdr.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows[0], evals[0].metrics);
    assert!(dir.path().join("logs/dwa-1_trial_0002.json").exists());
}

#[test]
fn successful_paths_are_at_least_the_straight_line() {
    let s = quick_scenario();
    let e = evaluate(&Planner::Dwa, &s, 6, 3).unwrap();
    let step = s.world.limits.v_max * s.world.dt;
    for (t, log) in e.trials.iter().zip(&e.logs) {
        if t.outcome != Termination::Goal {
            continue;
        }
        let start = &log.rows[0];
        let straight = ((start.x - s.world.goal.x).powi(2) + (start.y - s.world.goal.y).powi(2)).sqrt() - s.world.goal_radius;
        assert!(t.path_length_m >= straight - step, "{} < {straight}", t.path_length_m);
    }
}

#[test]
fn empty_world_dwa_never_collides() {
    let mut s = quick_scenario();
    s.world.obstacles.clear();
    s.training.max_steps = 300;
    let e = evaluate(&Planner::Dwa, &s, 10, 4).unwrap();
    assert_eq!(e.metrics.collisions, 0);
}

#[test]
fn checkpoint_shape_must_match_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = quick_scenario();
    train(&s, 1, 0, dir.path()).unwrap();
    s.sensor.n_beams = 12;
    let err = Planner::load(PlannerKind::Td3Dwa, Some(&dir.path().join(CHECKPOINT_FILE)), &s).unwrap_err();
    assert!(matches!(err, navlab::Error::ShapeMismatch { .. }));
    assert!(read_log(&dir.path().join(CHECKPOINT_FILE)).is_err());
}
