use std::fmt;

use crate::forwarding::MPR_INF;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CtlState {
    /// Grow
    G,
    /// Counting positive windows
    C,
    /// MMPR above X; window frozen
    P,
    /// Stable
    S,
    /// Waiting in S after MMPR hit zero
    Z,
}

impl fmt::Display for CtlState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CtlState::G => "G",
            CtlState::C => "C",
            CtlState::P => "P",
            CtlState::S => "S",
            CtlState::Z => "Z",
        };
        f.write_str(s)
    }
}

impl CtlState {
    pub fn code(self) -> u8 {
        match self {
            CtlState::G => 0,
            CtlState::C => 1,
            CtlState::P => 2,
            CtlState::S => 3,
            CtlState::Z => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowParams {
    pub x: u32,
    pub y: u32,
    pub w_init: u32,
    pub w_min: u32,
}

impl Default for WindowParams {
    fn default() -> Self {
        WindowParams {
            x: 5,
            y: 5,
            w_init: 2,
            w_min: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceiverControlState {
    pub window: u32,
    pub state: CtlState,
    /// Running minimum MPR in the current window; `MPR_INF` when none seen.
    pub mmpr: u32,
    pub positive_windows: u32,
    pub zero_windows: u32,
    /// ANP arrivals in the current window.
    pub arrivals: u32,
    /// Set after a decrease; further marks are ignored until the next boundary.
    pub mark_guard: bool,
    pub params: WindowParams,
}

/// Result of feeding one ANP Data to the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feed {
    Nothing,
    Halved { before: u32, after: u32 },
    WindowEnd(Decision),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub mmpr: u32,
    pub from: CtlState,
    pub to: CtlState,
    pub window_before: u32,
    pub window_after: u32,
}

impl ReceiverControlState {
    pub fn new(params: WindowParams) -> Self {
        ReceiverControlState {
            window: params.w_init.max(params.w_min),
            state: CtlState::G,
            mmpr: MPR_INF,
            positive_windows: 0,
            zero_windows: 0,
            arrivals: 0,
            mark_guard: false,
            params,
        }
    }

    /// Record one ANP Data carrying `mpr`, reacting to a mark at once.
    pub fn record(&mut self, mpr: u32, marked: bool) -> Feed {
        self.mmpr = self.mmpr.min(mpr);
        if marked && !self.mark_guard {
            let before = self.window;
            self.on_mark();
            return Feed::Halved {
                before,
                after: self.window,
            };
        }
        self.arrivals += 1;
        if self.arrivals >= self.window {
            let d = self.end_window();
            return Feed::WindowEnd(d);
        }
        Feed::Nothing
    }

    /// Halve, return to G and clear every counter.
    pub fn on_mark(&mut self) {
        self.window = (self.window / 2).max(self.params.w_min);
        self.state = CtlState::G;
        self.positive_windows = 0;
        self.zero_windows = 0;
        self.mmpr = MPR_INF;
        self.arrivals = 0;
        self.mark_guard = true;
    }

    fn end_window(&mut self) -> Decision {
        let (mmpr, from, window_before) = (self.mmpr, self.state, self.window);
        *self = on_window_end(self);
        Decision {
            mmpr,
            from,
            to: self.state,
            window_before,
            window_after: self.window,
        }
    }
}

/// Window-boundary transition. Resets the MMPR tracker to infinity.
pub fn on_window_end(st: &ReceiverControlState) -> ReceiverControlState {
    let mut n = st.clone();
    let x = st.params.x;
    let y = st.params.y;
    let m = st.mmpr;
    let zero = m == 0;
    let high = m > x;
    match st.state {
        CtlState::G | CtlState::C => {
            if zero {
                n.window += 1;
                n.state = CtlState::G;
                n.positive_windows = 0;
            } else if high {
                n.state = CtlState::P;
                n.positive_windows += 1;
            } else {
                n.window += 1;
                n.positive_windows += 1;
                n.state = if n.positive_windows >= y {
                    CtlState::S
                } else {
                    CtlState::C
                };
            }
        }
        CtlState::P => {
            if zero {
                n.state = CtlState::C;
                n.positive_windows = 0;
            } else if high {
                n.positive_windows += 1;
            } else {
                n.positive_windows += 1;
                if n.positive_windows >= y {
                    n.state = CtlState::S;
                } else {
                    n.state = CtlState::C;
                    n.window += 1;
                }
            }
        }
        CtlState::S => {
            if zero {
                n.zero_windows = 1;
                n.state = CtlState::Z;
                if n.zero_windows >= y {
                    n.state = CtlState::G;
                    n.zero_windows = 0;
                    n.positive_windows = 0;
                    n.window += 1;
                }
            }
        }
        CtlState::Z => {
            if zero {
                n.zero_windows += 1;
                if n.zero_windows >= y {
                    n.state = CtlState::G;
                    n.zero_windows = 0;
                    n.positive_windows = 0;
                    n.window += 1;
                }
            } else {
                n.state = CtlState::S;
                n.zero_windows = 0;
            }
        }
    }
    n.mmpr = MPR_INF;
    n.arrivals = 0;
    n.mark_guard = false;
    n
}
