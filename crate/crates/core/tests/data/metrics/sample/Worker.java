package sample;

import java.io.Closeable;
import java.io.IOException;

public abstract class Worker implements Runnable {
    private final Object lock = new Object();
    private int runs;

    protected abstract Closeable open() throws IOException;

    @Override
    public void run() {
        synchronized (lock) {
            runs++;
        }
        try (Closeable c = open()) {
            work(c);
        } catch (IOException e) {
            throw new IllegalStateException(e);
        }
    }

    protected void work(Object target) {
        if (target instanceof Closeable) {
            runs = runs * 2;
        }
    }

    public final int runs() {
        return runs;
    }
}
