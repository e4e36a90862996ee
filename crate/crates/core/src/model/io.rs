use std::io::{Read, Write};

use super::{Controls, Direction, InertialPath, RelState, TimedTrajectory, TrajectorySample};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

// Display on f32/f64 prints the shortest string that parses back exactly.
fn fmt<T: Scalar>(v: T) -> String {
    format!("{v}")
}

/// Writes `t,x,y,u_e,u_p` rows; `u_p` is wrapped to `(-pi, pi]`.
pub fn write_relative_csv<T: Scalar, W: Write>(w: W, traj: &TimedTrajectory<T>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "x", "y", "u_e", "u_p"]).map_err(csv_err)?;
    for s in &traj.samples {
        out.write_record([
            fmt(s.t),
            fmt(s.state.x),
            fmt(s.state.y),
            fmt(s.controls.u_e),
            fmt(s.controls.wrapped_u_p()),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `t,xe,ye,theta_e,xp,yp` rows.
pub fn write_inertial_csv<T: Scalar, W: Write>(w: W, path: &InertialPath<T>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "xe", "ye", "theta_e", "xp", "yp"]).map_err(csv_err)?;
    for s in &path.samples {
        let st = &s.state;
        out.write_record([fmt(s.t), fmt(st.xe), fmt(st.ye), fmt(st.theta_e), fmt(st.xp), fmt(st.yp)])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a relative trajectory written by [`write_relative_csv`]. The result
/// is tagged forward.
pub fn read_relative_csv<T: Scalar, R: Read>(r: R) -> Result<TimedTrajectory<T>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != ["t", "x", "y", "u_e", "u_p"] {
        return Err(Error::Io(format!("unexpected header {:?}", header)));
    }
    let mut traj = TimedTrajectory::new(Direction::Forward);
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let mut v = [T::zero(); 5];
        for (i, field) in rec.iter().enumerate().take(5) {
            let x: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Io(format!("bad number {field:?}")))?;
            v[i] = T::c(x);
        }
        traj.samples.push(TrajectorySample {
            t: v[0],
            state: RelState::new(v[1], v[2]),
            controls: Controls::new(v[3], v[4]),
        });
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_round_trip_is_exact() {
        let mut tr = TimedTrajectory::new(Direction::Forward);
        for k in 0..10 {
            let t = k as f64 * 0.1;
            tr.samples.push(TrajectorySample {
                t,
                state: RelState::new(t.sin() / 3.0, -t.cos() * 0.7),
                controls: Controls::new(-1.0, 1.0 + t / 7.0),
            });
        }
        let mut buf = Vec::new();
        write_relative_csv(&mut buf, &tr).unwrap();
        assert!(buf.starts_with(b"t,x,y,u_e,u_p\n"));
        let back: TimedTrajectory<f64> = read_relative_csv(buf.as_slice()).unwrap();
        assert_eq!(back.samples, tr.samples);
    }

    #[test]
    fn bad_header_rejected() {
        let r = read_relative_csv::<f64, _>("a,b\n1,2\n".as_bytes());
        assert!(matches!(r, Err(Error::Io(_))));
    }
}
